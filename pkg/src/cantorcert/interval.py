"""Closed-interval arithmetic with two interchangeable backends.

Endpoints are either :class:`fractions.Fraction` (exact mode, the default and
the only mode certificates are checked in) or ``float`` (fast mode, every
operation rounded outward by one ulp).  The backend is picked from the
endpoint types, so the same functions serve both.

Square roots and integer roots are not rational in general; in exact mode
they return certified dyadic bounds whose width is at most ``2**-precision``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import DomainError, NegativeDomain

Number = Union[Fraction, float, int]

DEFAULT_PRECISION = 40

DOWN = -1
UP = 1


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for a nonnegative integer n."""
    if n < 0:
        raise NegativeDomain("integer root of a negative number")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


class ExactArith:
    """Rational arithmetic; only roots are rounded, to dyadic bounds."""

    name = "exact"

    def __init__(self, precision: int = DEFAULT_PRECISION):
        self.precision = precision

    def conv(self, x, rnd=0) -> Fraction:
        return x if isinstance(x, Fraction) else Fraction(x)

    def add(self, a, b, rnd=0):
        return a + b

    def sub(self, a, b, rnd=0):
        return a - b

    def mul(self, a, b, rnd=0):
        return a * b

    def div(self, a, b, rnd=0):
        return Fraction(a) / b

    def root(self, a, k: int, rnd: int) -> Fraction:
        a = Fraction(a)
        if a < 0:
            raise NegativeDomain(f"root of negative value {a}")
        if a == 0:
            return Fraction(0)
        scale = 1 << (k * self.precision)
        lo_int = _iroot(a.numerator * scale // a.denominator, k)
        lo = Fraction(lo_int, 1 << self.precision)
        if rnd == DOWN or lo ** k == a:
            return lo
        return lo + Fraction(1, 1 << self.precision)

    def sqrt(self, a, rnd: int) -> Fraction:
        return self.root(a, 2, rnd)


class FloatArith:
    """IEEE double arithmetic, each result pushed one ulp outward."""

    name = "fast"
    precision = 53

    @staticmethod
    def _round(v: float, rnd: int) -> float:
        if rnd == DOWN:
            return math.nextafter(v, -math.inf)
        if rnd == UP:
            return math.nextafter(v, math.inf)
        return v

    def conv(self, x, rnd=0) -> float:
        f = float(x)
        if isinstance(x, float) or rnd == 0:
            return f
        exact = Fraction(x)
        if rnd == DOWN and Fraction(f) > exact:
            return math.nextafter(f, -math.inf)
        if rnd == UP and Fraction(f) < exact:
            return math.nextafter(f, math.inf)
        return f

    def add(self, a, b, rnd=0):
        return self._round(float(a) + float(b), rnd)

    def sub(self, a, b, rnd=0):
        return self._round(float(a) - float(b), rnd)

    def mul(self, a, b, rnd=0):
        return self._round(float(a) * float(b), rnd)

    def div(self, a, b, rnd=0):
        return self._round(float(a) / float(b), rnd)

    def root(self, a, k: int, rnd: int) -> float:
        a = float(a)
        if a < 0:
            raise NegativeDomain(f"root of negative value {a}")
        if a == 0:
            return 0.0
        r = math.sqrt(a) if k == 2 else a ** (1.0 / k)
        # pow is not correctly rounded: step a few ulps and then repair
        steps = 1 if k == 2 else 4
        for _ in range(steps):
            r = self._round(r, rnd)
        if k != 2:
            while rnd == DOWN and Fraction(r) ** k > Fraction(a):
                r = math.nextafter(r, -math.inf)
            while rnd == UP and Fraction(r) ** k < Fraction(a):
                r = math.nextafter(r, math.inf)
        return max(r, 0.0)

    def sqrt(self, a, rnd: int) -> float:
        return self.root(a, 2, rnd)


EXACT = ExactArith()
FAST = FloatArith()


def arith_for(*values) -> Union[ExactArith, FloatArith]:
    for v in values:
        if isinstance(v, float):
            return FAST
        if isinstance(v, Interval) and (isinstance(v.lo, float) or isinstance(v.hi, float)):
            return FAST
    return EXACT


def parse_rational(text) -> Fraction:
    """Parse ``"1/3"``, ``"0.25"``, ``"-2"`` (or an int/Fraction) exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise DomainError(f"not a rational literal: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational literal: {text!r}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Interval:
    lo: Number
    hi: Number

    def __post_init__(self):
        if isinstance(self.lo, int) and not isinstance(self.lo, bool):
            object.__setattr__(self, "lo", Fraction(self.lo))
        if isinstance(self.hi, int) and not isinstance(self.hi, bool):
            object.__setattr__(self, "hi", Fraction(self.hi))
        if not self.lo <= self.hi:
            raise DomainError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    @classmethod
    def parse(cls, pair) -> "Interval":
        lo, hi = pair
        return cls(parse_rational(lo), parse_rational(hi))

    def to_json(self) -> list:
        return [format_rational(self.lo), format_rational(self.hi)]

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    __contains__ = contains

    def interior_contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo < x.lo and x.hi < self.hi
        return self.lo < x < self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersection(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def separation(self, other: "Interval"):
        """Distance between the two intervals (0 when they meet)."""
        return max(other.lo - self.hi, self.lo - other.hi, 0)

    def widen(self, eps) -> "Interval":
        return Interval(self.lo - eps, self.hi + eps)

    def to_float(self) -> "Interval":
        return Interval(FAST.conv(self.lo, DOWN), FAST.conv(self.hi, UP))

    def to_exact(self) -> "Interval":
        return Interval(Fraction(self.lo), Fraction(self.hi))

    def __add__(self, other):
        return iv_add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return iv_sub(self, _lift(other))

    def __rsub__(self, other):
        return iv_sub(_lift(other), self)

    def __mul__(self, other):
        return iv_mul(self, _lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return iv_div(self, _lift(other))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __abs__(self):
        return iv_abs(self)

    def __repr__(self):
        def fmt(v):
            return format_rational(v) if isinstance(v, Fraction) else repr(v)
        return f"[{fmt(self.lo)}, {fmt(self.hi)}]"


def _lift(x) -> Interval:
    return x if isinstance(x, Interval) else Interval(x, x)


def iv_add(a: Interval, b: Interval) -> Interval:
    ar = arith_for(a, b)
    return Interval(ar.add(a.lo, b.lo, DOWN), ar.add(a.hi, b.hi, UP))


def iv_sub(a: Interval, b: Interval) -> Interval:
    ar = arith_for(a, b)
    return Interval(ar.sub(a.lo, b.hi, DOWN), ar.sub(a.hi, b.lo, UP))


def iv_mul(a: Interval, b: Interval) -> Interval:
    ar = arith_for(a, b)
    pairs = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)]
    return Interval(min(ar.mul(x, y, DOWN) for x, y in pairs),
                    max(ar.mul(x, y, UP) for x, y in pairs))


def iv_div(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0 <= b.hi:
        raise DomainError(f"division by an interval containing 0: {b}")
    ar = arith_for(a, b)
    pairs = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)]
    return Interval(min(ar.div(x, y, DOWN) for x, y in pairs),
                    max(ar.div(x, y, UP) for x, y in pairs))


def iv_abs(a: Interval) -> Interval:
    if a.lo >= 0:
        return a
    if a.hi <= 0:
        return -a
    return Interval(a.lo * 0, max(-a.lo, a.hi))


def iv_pow(a: Interval, n: int) -> Interval:
    """Integer power n >= 0 (tight: even powers go through |a|)."""
    if n < 0:
        raise DomainError("negative exponent")
    if n == 0:
        one = 1.0 if isinstance(a.lo, float) else Fraction(1)
        return Interval(one, one)
    base = iv_abs(a) if n % 2 == 0 else a
    if isinstance(a.lo, float):
        # exact power of the float endpoints, rounded once
        return Interval(FAST.conv(Fraction(base.lo) ** n, DOWN),
                        FAST.conv(Fraction(base.hi) ** n, UP))
    return Interval(base.lo ** n, base.hi ** n)


def iv_sqrt_enclose(a: Interval, precision: int | None = None) -> Interval:
    """Enclosure of ``{sqrt(t) : t in a}``; exact endpoints when they are squares."""
    return iv_root(a, 2, precision)


def iv_root(a: Interval, k: int, precision: int | None = None) -> Interval:
    if a.lo < 0:
        raise NegativeDomain(f"root of interval with negative part: {a}")
    ar = arith_for(a)
    if ar is EXACT and precision is not None and precision != EXACT.precision:
        ar = ExactArith(precision)
    return Interval(ar.root(a.lo, k, DOWN), ar.root(a.hi, k, UP))


def iv_min(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi))


def iv_max(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))


@dataclass(frozen=True)
class Box2:
    x: Interval
    y: Interval

    @classmethod
    def square(cls, center, radius) -> "Box2":
        cx, cy = center
        return cls(Interval(cx - radius, cx + radius), Interval(cy - radius, cy + radius))

    @classmethod
    def point(cls, p) -> "Box2":
        return cls(Interval.point(p[0]), Interval.point(p[1]))

    @classmethod
    def parse(cls, obj) -> "Box2":
        return cls(Interval.parse(obj["x"]), Interval.parse(obj["y"]))

    def to_json(self) -> dict:
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    def contains(self, other) -> bool:
        if isinstance(other, Box2):
            return self.x.contains(other.x) and self.y.contains(other.y)
        return self.x.contains(other[0]) and self.y.contains(other[1])

    __contains__ = contains

    def intersects(self, other: "Box2") -> bool:
        return self.x.intersects(other.x) and self.y.intersects(other.y)

    def intersection(self, other: "Box2") -> "Box2 | None":
        x, y = self.x.intersection(other.x), self.y.intersection(other.y)
        if x is None or y is None:
            return None
        return Box2(x, y)

    @property
    def is_point(self) -> bool:
        return self.x.width == 0 and self.y.width == 0

    def __repr__(self):
        return f"{self.x!r}x{self.y!r}"


class IntervalUnion:
    """A finite union of closed intervals; :meth:`normalized` merges overlaps."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[Interval] = ()):
        self.parts = tuple(parts)

    def normalized(self) -> "IntervalUnion":
        merged: list[Interval] = []
        for iv in sorted(self.parts, key=lambda p: (p.lo, p.hi)):
            if merged and iv.lo <= merged[-1].hi:
                last = merged[-1]
                merged[-1] = Interval(last.lo, max(last.hi, iv.hi))
            else:
                merged.append(iv)
        return IntervalUnion(merged)

    def is_normalized(self) -> bool:
        return all(a.hi < b.lo for a, b in zip(self.parts, self.parts[1:]))

    def measure(self):
        return sum((p.width for p in self.normalized().parts), Fraction(0))

    def component_containing(self, j: Interval) -> Interval | None:
        for p in self.normalized().parts:
            if p.contains(j):
                return p
        return None

    def __eq__(self, other):
        return isinstance(other, IntervalUnion) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __repr__(self):
        return "IntervalUnion(" + ", ".join(map(repr, self.parts)) + ")"


def union_covers(u: IntervalUnion, j: Interval) -> bool:
    """True iff ``j`` lies inside the union (closed containment, exact)."""
    return u.component_containing(j) is not None
