"""Finitely described Cantor sets in the line.

Three families are supported:

* :class:`AffineIFS` -- attractor of finitely many orientation-preserving
  similarities ``x -> r*x + t`` whose images of the hull are disjoint;
* :class:`GapSchedule` -- a "fat" Cantor set: at level ``n`` each of the
  ``2**(n-1)`` surviving intervals loses a centred open gap, the gaps of one
  level summing to ``g * rho**(n-1)``;
* :class:`FiniteUnion` -- a disjoint union of the above.

Every construction interval (cell) is addressed by a tuple of branch indices.
The empty address is the hull.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .errors import EmptyRestriction, InvalidAddress, InvalidSet
from .interval import Interval, format_rational, parse_rational

Address = tuple

RESTRICT_DEPTH = 24


@dataclass(frozen=True)
class Shape:
    """Geometry of one cell and its children, relative to the cell's left end."""

    width: Fraction
    children: tuple  # ((lo, hi), ...) sorted by position

    @property
    def gaps(self):
        return [b[0] - a[1] for a, b in zip(self.children, self.children[1:])]


@dataclass(frozen=True)
class Envelope:
    """Geometric bounds ``c * lam**(k - K)`` valid for all relative depths k >= K.

    Each field is a ``(c, lam)`` pair.  ``max_width``/``max_gap`` are upper
    bounds, ``min_width``/``min_child`` lower bounds.
    """

    max_width: tuple
    min_width: tuple
    min_child: tuple
    max_gap: tuple


class CantorSet:
    """Common interface.  Concrete classes are immutable."""

    kind = "abstract"

    @property
    def hull(self) -> Interval:
        raise NotImplementedError

    def branch_count(self, address: Address = ()) -> int:
        raise NotImplementedError

    def cell(self, address: Address = ()) -> Interval:
        raise NotImplementedError

    def member_point(self, address: Address = ()) -> Fraction:
        raise NotImplementedError

    def cell_set(self, address: Address = ()) -> "CantorSet":
        """The sub-Cantor set living in ``cell(address)``, re-rooted."""
        raise NotImplementedError

    def measure_lower_bound(self) -> Fraction:
        raise NotImplementedError

    def measure_upper_bound(self) -> Fraction:
        raise NotImplementedError

    @property
    def max_ratio(self) -> Fraction:
        """Largest child/parent width ratio over all cells."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # shared helpers

    def check_address(self, address: Address) -> Address:
        address = tuple(address)
        prefix: tuple = ()
        for i in address:
            if not isinstance(i, int) or i < 0 or i >= self.branch_count(prefix):
                raise InvalidAddress(f"address {address} invalid at index {len(prefix)}")
            prefix += (i,)
        return address

    def children(self, address: Address = ()) -> list:
        """Child addresses ordered left to right by position."""
        kids = [tuple(address) + (i,) for i in range(self.branch_count(address))]
        return sorted(kids, key=lambda a: self.cell(a).lo)

    def addresses(self, depth: int, prefix: Address = ()) -> Iterator[Address]:
        """All addresses of the given length below ``prefix``, left to right."""
        if depth == 0:
            yield tuple(prefix)
            return
        for child in self.children(prefix):
            yield from self.addresses(depth - 1, child)

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(repr(self.to_json()))


class AffineIFS(CantorSet):
    kind = "ifs"

    def __init__(self, hull: Interval, maps: Sequence[tuple]):
        self._hull = Interval(Fraction(hull.lo), Fraction(hull.hi))
        self.maps = tuple((Fraction(r), Fraction(t)) for r, t in maps)
        self._cells: dict = {}
        if len(self.maps) < 2:
            raise InvalidSet("an IFS needs at least two maps")
        if self._hull.width <= 0:
            raise InvalidSet("hull must have positive length")
        for r, _ in self.maps:
            if not 0 < r < 1:
                raise InvalidSet(f"contraction ratio {r} outside (0, 1)")
        images = sorted((self._image(i) for i in range(len(self.maps))), key=lambda iv: iv.lo)
        for im in images:
            if not self._hull.contains(im):
                raise InvalidSet(f"map image {im} leaves the hull {self._hull}")
        for a, b in zip(images, images[1:]):
            if not a.hi < b.lo:
                raise InvalidSet("map images must be pairwise disjoint with a positive gap")

    @classmethod
    def middle_thirds(cls) -> "AffineIFS":
        third = Fraction(1, 3)
        return cls(Interval(0, 1), [(third, 0), (third, 2 * third)])

    @classmethod
    def uniform(cls, ratio, hull=None) -> "AffineIFS":
        """Two maps of equal ratio pinned to the ends of ``hull`` (default [0, 1])."""
        hull = hull or Interval(0, 1)
        r = Fraction(ratio)
        return cls(hull, [(r, hull.lo - r * hull.lo), (r, hull.hi - r * hull.hi)])

    def _image(self, i: int) -> Interval:
        r, t = self.maps[i]
        return Interval(r * self._hull.lo + t, r * self._hull.hi + t)

    @property
    def hull(self) -> Interval:
        return self._hull

    @property
    def ratios(self) -> tuple:
        return tuple(r for r, _ in self.maps)

    @property
    def max_ratio(self) -> Fraction:
        return max(self.ratios)

    def branch_count(self, address: Address = ()) -> int:
        return len(self.maps)

    def _compose(self, address: Address) -> tuple:
        scale, shift = Fraction(1), Fraction(0)
        for i in self.check_address(address):
            r, t = self.maps[i]
            scale, shift = scale * r, scale * t + shift
        return scale, shift

    def cell(self, address: Address = ()) -> Interval:
        address = tuple(address)
        iv = self._cells.get(address)
        if iv is None:
            s, c = self._compose(address)
            iv = Interval(s * self._hull.lo + c, s * self._hull.hi + c)
            self._cells[address] = iv
        return iv

    @cached_property
    def fixed_point(self) -> Fraction:
        r, t = self.maps[0]
        return t / (1 - r)

    def member_point(self, address: Address = ()) -> Fraction:
        s, c = self._compose(address)
        return s * self.fixed_point + c

    def cell_set(self, address: Address = ()) -> "AffineIFS":
        s, c = self._compose(address)
        if s == 1:
            return self
        maps = [(r, -r * c + s * t + c) for r, t in self.maps]
        return AffineIFS(self.cell(address), maps)

    def measure_lower_bound(self) -> Fraction:
        return Fraction(0)

    def measure_upper_bound(self) -> Fraction:
        # disjoint images force sum(r) < 1, hence a null attractor
        return Fraction(0)

    @cached_property
    def normalized_children(self) -> tuple:
        w, lo = self._hull.width, self._hull.lo
        ims = sorted((self._image(i) for i in range(len(self.maps))), key=lambda iv: iv.lo)
        return tuple(((im.lo - lo) / w, (im.hi - lo) / w) for im in ims)

    def level_shapes(self, k: int) -> list:
        scales = {Fraction(1)}
        for _ in range(k):
            scales = {s * r for s in scales for r in self.ratios}
        w = self._hull.width
        out = []
        for s in sorted(scales):
            cw = s * w
            out.append(Shape(cw, tuple((cw * a, cw * b) for a, b in self.normalized_children)))
        return out

    def tail_envelope(self, K: int) -> Envelope:
        w = self._hull.width
        rmin, rmax = min(self.ratios), max(self.ratios)
        kids = self.normalized_children
        gmax = max(b[0] - a[1] for a, b in zip(kids, kids[1:]))
        return Envelope(
            max_width=(w * rmax ** K, rmax),
            min_width=(w * rmin ** K, rmin),
            min_child=(w * rmin ** (K + 1), rmin),
            max_gap=(w * rmax ** K * gmax, rmax),
        )

    def to_json(self) -> dict:
        return {
            "kind": "ifs",
            "hull": self._hull.to_json(),
            "maps": [[format_rational(r), format_rational(t)] for r, t in self.maps],
        }

    def __repr__(self):
        return f"AffineIFS(hull={self._hull!r}, maps={[(str(r), str(t)) for r, t in self.maps]})"


class GapSchedule(CantorSet):
    kind = "gap"

    def __init__(self, hull: Interval, g, rho):
        self._hull = Interval(Fraction(hull.lo), Fraction(hull.hi))
        self.g = Fraction(g)
        self.rho = Fraction(rho)
        self._widths: dict = {}
        self._cells: dict = {}
        if self._hull.width <= 0:
            raise InvalidSet("hull must have positive length")
        if self.g <= 0:
            raise InvalidSet("g must be positive")
        if not 0 < self.rho < 1:
            raise InvalidSet("rho must lie in (0, 1)")
        # At level n the parent interval has length (W - g(1-rho^(n-1))/(1-rho)) / 2^(n-1)
        # and its gap is g rho^(n-1) / 2^(n-1); the gap fits iff g(1-rho^n)/(1-rho) < W,
        # which holds at every level exactly when g/(1-rho) < W.
        if not self.total_removed < self._hull.width:
            raise InvalidSet(
                f"gaps overflow the hull: g/(1-rho) = {self.total_removed} >= {self._hull.width}")

    @property
    def total_removed(self) -> Fraction:
        return self.g / (1 - self.rho)

    @property
    def feasibility_depth(self):
        """Depth up to which gaps verifiably fit: all of them (closed form)."""
        return None

    @property
    def hull(self) -> Interval:
        return self._hull

    @property
    def max_ratio(self) -> Fraction:
        return Fraction(1, 2)

    def branch_count(self, address: Address = ()) -> int:
        return 2

    def gap(self, level: int) -> Fraction:
        """Length of the gap cut from one interval when passing to ``level`` (>= 1)."""
        return self.g * self.rho ** (level - 1) / 2 ** (level - 1)

    def width(self, level: int) -> Fraction:
        w = self._widths.get(level)
        if w is None:
            w_inf = self._hull.width - self.total_removed
            w = (w_inf + self.g * self.rho ** level / (1 - self.rho)) / 2 ** level
            self._widths[level] = w
        return w

    def cell(self, address: Address = ()) -> Interval:
        address = tuple(address)
        c = self._cells.get(address)
        if c is not None:
            return c
        if not address:
            return self._hull
        if address[-1] not in (0, 1):
            raise InvalidAddress(f"address {address} invalid at index {len(address) - 1}")
        parent = self.cell(address[:-1])
        w = self.width(len(address))
        c = Interval(parent.lo, parent.lo + w) if address[-1] == 0 else Interval(parent.hi - w, parent.hi)
        self._cells[address] = c
        return c

    def member_point(self, address: Address = ()) -> Fraction:
        # left endpoints are never inside a centred gap
        return self.cell(address).lo

    def cell_set(self, address: Address = ()) -> "GapSchedule":
        address = self.check_address(address)
        n = len(address)
        if n == 0:
            return self
        return GapSchedule(self.cell(address), self.g * self.rho ** n / 2 ** n, self.rho)

    def measure_lower_bound(self) -> Fraction:
        return self._hull.width - self.total_removed

    measure_upper_bound = measure_lower_bound

    def level_shapes(self, k: int) -> list:
        w, c = self.width(k), self.width(k + 1)
        return [Shape(w, ((Fraction(0), c), (w - c, w)))]

    def tail_envelope(self, K: int) -> Envelope:
        w_inf = self._hull.width - self.total_removed
        half = Fraction(1, 2)
        return Envelope(
            max_width=(self.width(K), half),
            min_width=(w_inf / 2 ** K, half),
            min_child=(w_inf / 2 ** (K + 1), half),
            max_gap=(self.gap(K + 1), self.rho / 2),
        )

    def to_json(self) -> dict:
        return {
            "kind": "gap",
            "hull": self._hull.to_json(),
            "g": format_rational(self.g),
            "rho": format_rational(self.rho),
        }

    def __repr__(self):
        return f"GapSchedule(hull={self._hull!r}, g={self.g}, rho={self.rho})"


class FiniteUnion(CantorSet):
    kind = "union"

    def __init__(self, parts: Sequence[CantorSet]):
        parts = sorted(parts, key=lambda p: p.hull.lo)
        if not parts:
            raise InvalidSet("a union needs at least one part")
        for a, b in zip(parts, parts[1:]):
            if not a.hull.hi < b.hull.lo:
                raise InvalidSet(f"union parts overlap: {a.hull} and {b.hull}")
        self.parts = tuple(parts)

    @property
    def hull(self) -> Interval:
        return Interval(self.parts[0].hull.lo, self.parts[-1].hull.hi)

    @property
    def max_ratio(self) -> Fraction:
        return max(p.max_ratio for p in self.parts)

    def branch_count(self, address: Address = ()) -> int:
        address = tuple(address)
        if not address:
            return len(self.parts)
        if not 0 <= address[0] < len(self.parts):
            raise InvalidAddress(f"no union part {address[0]}")
        return self.parts[address[0]].branch_count(address[1:])

    def _split(self, address: Address):
        address = tuple(address)
        if not 0 <= address[0] < len(self.parts):
            raise InvalidAddress(f"no union part {address[0]}")
        return self.parts[address[0]], address[1:]

    def cell(self, address: Address = ()) -> Interval:
        if not address:
            return self.hull
        part, rest = self._split(address)
        return part.cell(rest)

    def member_point(self, address: Address = ()) -> Fraction:
        if not address:
            return self.parts[0].member_point(())
        part, rest = self._split(address)
        return part.member_point(rest)

    def cell_set(self, address: Address = ()) -> CantorSet:
        if not address:
            return self
        part, rest = self._split(address)
        return part.cell_set(rest)

    def measure_lower_bound(self) -> Fraction:
        return sum((p.measure_lower_bound() for p in self.parts), Fraction(0))

    def measure_upper_bound(self) -> Fraction:
        return sum((p.measure_upper_bound() for p in self.parts), Fraction(0))

    def to_json(self) -> dict:
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}

    def __repr__(self):
        return f"FiniteUnion({list(self.parts)!r})"


def set_from_json(obj: dict) -> CantorSet:
    kind = obj.get("kind")
    if kind == "ifs":
        maps = [(parse_rational(r), parse_rational(t)) for r, t in obj["maps"]]
        return AffineIFS(Interval.parse(obj["hull"]), maps)
    if kind == "gap":
        return GapSchedule(Interval.parse(obj["hull"]), parse_rational(obj["g"]),
                           parse_rational(obj["rho"]))
    if kind == "union":
        return FiniteUnion([set_from_json(p) for p in obj["parts"]])
    if kind == "middle-thirds":
        return AffineIFS.middle_thirds()
    if kind == "uniform":
        hull = Interval.parse(obj["hull"]) if "hull" in obj else None
        return AffineIFS.uniform(parse_rational(obj["ratio"]), hull)
    raise InvalidSet(f"unknown set kind {kind!r}")


def cell(s: CantorSet, address: Address = ()) -> Interval:
    return s.cell(address)


def member_point(s: CantorSet, address: Address = ()) -> Fraction:
    return s.member_point(address)


def measure_lower_bound(s: CantorSet) -> Fraction:
    return s.measure_lower_bound()


def _inside(I: Interval, c: Interval, open_: bool) -> bool:
    return I.interior_contains(c) if open_ else I.contains(c)


def _disjoint(I: Interval, c: Interval, open_: bool) -> bool:
    if open_:
        return c.hi <= I.lo or c.lo >= I.hi
    return c.hi < I.lo or c.lo > I.hi


def restrict_cells(s: CantorSet, I: Interval, *, open: bool = False,
                   depth_budget: int = RESTRICT_DEPTH) -> list:
    """Addresses of the maximal cells of ``s`` inside ``I``, left to right."""
    found = []
    stack = [()]
    while stack:
        a = stack.pop()
        c = s.cell(a)
        if _disjoint(I, c, open):
            continue
        if _inside(I, c, open):
            found.append(a)
            continue
        if len(a) < depth_budget:
            stack.extend(reversed(s.children(a)))
    found.sort(key=lambda a: s.cell(a).lo)
    return found


def restrict(s: CantorSet, I: Interval, *, open: bool = False,
             depth_budget: int = RESTRICT_DEPTH) -> CantorSet:
    """Sub-Cantor set of ``s`` made of its maximal cells inside ``I``.

    With ``open=True`` cells must sit in the interior of ``I``.
    """
    addrs = restrict_cells(s, I, open=open, depth_budget=depth_budget)
    if not addrs:
        raise EmptyRestriction(f"no cell of depth <= {depth_budget} lies in {I}")
    if len(addrs) == 1:
        return s.cell_set(addrs[0])
    return FiniteUnion([s.cell_set(a) for a in addrs])


def all_addresses(s: CantorSet, depth: int) -> list:
    return list(s.addresses(depth))

