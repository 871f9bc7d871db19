"""Distance-like maps phi(z, (x, y)) with certified box enclosures.

``z`` is the pin (first argument) and ``(x, y)`` the point of the product set
(second argument).  Three maps ship: Euclidean distance, p-norm distance for
integer p >= 1, and the dot product ``z1*x + z2*y``.  New maps subclass
:class:`PhiFunction` and fill in the per-coordinate hooks.

Image computations are separable in the two coordinates, which is what makes
the closed forms below exact up to the final root.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError
from .interval import (
    DOWN,
    EXACT,
    FAST,
    UP,
    Box2,
    ExactArith,
    Interval,
    iv_abs,
    iv_div,
    iv_pow,
    iv_sub,
)


def arith_for_mode(mode: str = "exact", precision: int | None = None):
    if mode == "fast":
        return FAST
    if precision is None or precision == EXACT.precision:
        return EXACT
    return ExactArith(precision)


def _dmin(z, a: Interval):
    return max(a.lo - z, z - a.hi, 0)


def _dmax(z, a: Interval):
    return max(abs(z - a.lo), abs(z - a.hi))


def _clamp(v, iv: Interval):
    return min(max(v, iv.lo), iv.hi)


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class SignReport:
    signs: tuple
    enclosures: tuple

    @property
    def satisfied(self) -> bool:
        return all(s is not Sign.INDETERMINATE for s in self.signs)


def _sign_of(iv: Optional[Interval]) -> Sign:
    if iv is None:
        return Sign.INDETERMINATE
    if iv.lo > 0:
        return Sign.POSITIVE
    if iv.hi < 0:
        return Sign.NEGATIVE
    return Sign.INDETERMINATE


class PhiFunction:
    """Base class.  Subclasses provide images over boxes and partial enclosures."""

    kind = "abstract"

    def robust_image(self, U: Box2, B: Box2, arith=EXACT) -> Optional[Interval]:
        """Values attained on ``B`` for every pin in ``U`` (inner bound), or None."""
        raise NotImplementedError

    def hull_image(self, z, B: Box2, arith=EXACT) -> Interval:
        """Outer enclosure of ``{phi(z, p) : p in B}`` for a single pin."""
        raise NotImplementedError

    def enclose(self, U: Box2, B: Box2, arith=EXACT) -> Interval:
        """Outer enclosure of phi over ``U x B``."""
        raise NotImplementedError

    def partials(self, U: Box2, B: Box2, arith=EXACT) -> tuple:
        """Enclosures of d(phi)/dx and d(phi)/dy over ``U x B`` (None if undefined)."""
        raise NotImplementedError

    def value(self, z, p) -> float:
        raise NotImplementedError

    def values_np(self, z1, z2, X, Y) -> np.ndarray:
        raise NotImplementedError

    def exact_key(self, z, p) -> Fraction:
        """A rational that is a strictly increasing function of phi(z, p)."""
        raise NotImplementedError

    def key_to_value(self, key) -> float:
        return float(key)

    def to_json(self) -> dict:
        return {"kind": self.kind}

    def __eq__(self, other):
        return isinstance(other, PhiFunction) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(repr(self.to_json()))

    def __repr__(self):
        return f"{type(self).__name__}()"


class PNorm(PhiFunction):
    """``(|x - z1|^p + |y - z2|^p)^(1/p)`` for integer p >= 1."""

    kind = "pnorm"

    def __init__(self, p=2):
        p = Fraction(p)
        if p.denominator != 1 or p < 1:
            raise DomainError(f"p-norm needs an integer p >= 1, got {p}")
        self.p = int(p)

    def _pow_sum(self, terms, ar, rnd):
        total = ar.conv(0)
        for t in terms:
            t = ar.conv(t, rnd)
            v = t
            for _ in range(self.p - 1):
                v = ar.mul(v, t, rnd)
            total = ar.add(total, v, rnd)
        return total

    def _root(self, s, ar, rnd):
        if self.p == 1:
            return s
        return ar.root(s, self.p, rnd)

    def robust_image(self, U, B, arith=EXACT):
        lo_terms = [max(_dmin(U.x.lo, B.x), _dmin(U.x.hi, B.x)),
                    max(_dmin(U.y.lo, B.y), _dmin(U.y.hi, B.y))]
        hi_terms = [_dmax(_clamp(B.x.mid, U.x), B.x), _dmax(_clamp(B.y.mid, U.y), B.y)]
        L = self._root(self._pow_sum(lo_terms, arith, UP), arith, UP)
        H = self._root(self._pow_sum(hi_terms, arith, DOWN), arith, DOWN)
        return Interval(L, H) if L <= H else None

    def hull_image(self, z, B, arith=EXACT):
        lo = self._root(self._pow_sum([_dmin(z[0], B.x), _dmin(z[1], B.y)], arith, DOWN),
                        arith, DOWN)
        hi = self._root(self._pow_sum([_dmax(z[0], B.x), _dmax(z[1], B.y)], arith, UP),
                        arith, UP)
        return Interval(lo, hi)

    def _power_range(self, U, B, arith):
        dx, dy = iv_abs(iv_sub(B.x, U.x)), iv_abs(iv_sub(B.y, U.y))
        smin = self._pow_sum([dx.lo, dy.lo], arith, DOWN)
        smax = self._pow_sum([dx.hi, dy.hi], arith, UP)
        return smin, smax

    def enclose(self, U, B, arith=EXACT):
        smin, smax = self._power_range(U, B, arith)
        return Interval(self._root(smin, arith, DOWN), self._root(smax, arith, UP))

    def _numerator(self, N: Interval) -> Interval:
        # sign(d) |d|^(p-1) is nondecreasing in d
        k = self.p - 1
        if k == 0:
            return Interval(-1 if N.lo < 0 else (0 if N.lo == 0 else 1),
                            1 if N.hi > 0 else (0 if N.hi == 0 else -1))

        def f(v):
            r = abs(Fraction(v)) ** k
            return r if v >= 0 else -r

        return Interval(f(N.lo), f(N.hi))

    def partials(self, U, B, arith=EXACT):
        phi = self.enclose(U, B, arith)
        if phi.lo <= 0:
            return (None, None)
        den = iv_pow(phi, self.p - 1) if self.p > 1 else None
        out = []
        for N in (iv_sub(B.x, U.x), iv_sub(B.y, U.y)):
            num = self._numerator(N)
            if isinstance(N.lo, float):
                num = num.to_float()
            out.append(num if den is None else iv_div(num, den))
        return tuple(out)

    def value(self, z, p) -> float:
        return float(abs(float(p[0]) - float(z[0])) ** self.p
                     + abs(float(p[1]) - float(z[1])) ** self.p) ** (1.0 / self.p)

    def values_np(self, z1, z2, X, Y):
        if self.p == 2:
            return np.hypot(X - z1, Y - z2)
        return (np.abs(X - z1) ** self.p + np.abs(Y - z2) ** self.p) ** (1.0 / self.p)

    def exact_key(self, z, p):
        return abs(Fraction(p[0]) - z[0]) ** self.p + abs(Fraction(p[1]) - z[1]) ** self.p

    def key_to_value(self, key):
        return float(key) ** (1.0 / self.p)

    def to_json(self):
        return {"kind": "pnorm", "p": self.p}

    def __repr__(self):
        return f"PNorm(p={self.p})"


class Euclidean(PNorm):
    kind = "euclidean"

    def __init__(self):
        super().__init__(2)

    def value(self, z, p) -> float:
        return float(np.hypot(float(p[0]) - float(z[0]), float(p[1]) - float(z[1])))

    def to_json(self):
        return {"kind": "euclidean"}

    def __repr__(self):
        return "Euclidean()"


class DotProduct(PhiFunction):
    """``z1*x + z2*y``."""

    kind = "dot"

    @staticmethod
    def _candidates(Z: Interval):
        c = [Z.lo, Z.hi]
        if Z.lo < 0 < Z.hi:
            c.append(Z.lo * 0)
        return c

    def robust_image(self, U, B, arith=EXACT):
        L = H = arith.conv(0)
        for Z, A in ((U.x, B.x), (U.y, B.y)):
            cands = self._candidates(Z)
            # sup_z min_a z*a (concave in z) and inf_z max_a z*a (convex in z)
            lo = max(min(z * A.lo, z * A.hi) for z in cands)
            hi = min(max(z * A.lo, z * A.hi) for z in cands)
            L = arith.add(L, arith.conv(lo, UP), UP)
            H = arith.add(H, arith.conv(hi, DOWN), DOWN)
        return Interval(L, H) if L <= H else None

    def hull_image(self, z, B, arith=EXACT):
        lo = hi = arith.conv(0)
        for zc, A in ((z[0], B.x), (z[1], B.y)):
            lo = arith.add(lo, arith.conv(min(zc * A.lo, zc * A.hi), DOWN), DOWN)
            hi = arith.add(hi, arith.conv(max(zc * A.lo, zc * A.hi), UP), UP)
        return Interval(lo, hi)

    def enclose(self, U, B, arith=EXACT):
        ex = U.x * B.x + U.y * B.y
        return ex.to_float() if arith is FAST else ex

    def partials(self, U, B, arith=EXACT):
        return (U.x, U.y)

    def value(self, z, p) -> float:
        return float(z[0]) * float(p[0]) + float(z[1]) * float(p[1])

    def values_np(self, z1, z2, X, Y):
        return z1 * X + z2 * Y

    def exact_key(self, z, p):
        return Fraction(z[0]) * p[0] + Fraction(z[1]) * p[1]

    def __repr__(self):
        return "DotProduct()"


def parse_phi(spec) -> PhiFunction:
    """Accept ``"euclidean"``, ``"pnorm p=3"``, ``"dot"`` or a dict with ``kind``."""
    if isinstance(spec, PhiFunction):
        return spec
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "pnorm":
            return PNorm(Fraction(str(spec.get("p", 2))))
        return parse_phi(kind)
    text = str(spec).strip().lower()
    if text in ("euclidean", "euclid", "l2"):
        return Euclidean()
    if text in ("dot", "dotproduct", "dot-product"):
        return DotProduct()
    m = re.fullmatch(r"pnorm\s*(?:p\s*=\s*)?([0-9/]+)", text)
    if m:
        return PNorm(Fraction(m.group(1)))
    raise DomainError(f"unknown phi {spec!r}")


def hull_image(phi: PhiFunction, z, B: Box2, arith=EXACT) -> Interval:
    return phi.hull_image(z, B, arith)


def robust_image(phi: PhiFunction, U: Box2, B: Box2, arith=EXACT) -> Optional[Interval]:
    return phi.robust_image(U, B, arith)


def check_derivative_condition(phi: PhiFunction, A: Box2, B: Box2, arith=EXACT) -> SignReport:
    """Sign of each partial of phi in its second argument over ``A x B``."""
    encl = phi.partials(A, B, arith)
    return SignReport(tuple(_sign_of(e) for e in encl), tuple(encl))


def _bisect(box: Box2):
    if box.x.width >= box.y.width:
        m = box.x.mid
        return [Box2(Interval(box.x.lo, m), box.y), Box2(Interval(m, box.x.hi), box.y)]
    m = box.y.mid
    return [Box2(box.x, Interval(box.y.lo, m)), Box2(box.x, Interval(m, box.y.hi))]


def _area(box: Box2):
    return box.x.width * box.y.width


def split_until_definite(phi: PhiFunction, A: Box2, B: Box2, max_depth: int = 10):
    """Bisect ``A x B`` until the derivative condition is certified on each piece.

    Returns ``(definite, residual)``: lists of ``(A_i, B_i)`` pairs.  The
    residual pairs are those still indeterminate at ``max_depth``.
    """
    definite, residual = [], []
    stack = [(A, B, 0)]
    while stack:
        a, b, d = stack.pop()
        if check_derivative_condition(phi, a, b).satisfied:
            definite.append((a, b))
            continue
        if d >= max_depth:
            residual.append((a, b))
            continue
        if _area(a) >= _area(b) and _area(a) > 0 or _area(b) == 0:
            for piece in _bisect(a):
                stack.append((piece, b, d + 1))
        else:
            for piece in _bisect(b):
                stack.append((a, piece, d + 1))
    return definite, residual
