"""Similarity dimension, product dimension bounds and Newhouse thickness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cantor import AffineIFS, CantorSet, FiniteUnion, GapSchedule
from .errors import DomainError


@dataclass(frozen=True)
class DimensionReport:
    hausdorff_lower: float
    hausdorff_upper: float
    box_upper: float
    method: str = ""

    def __post_init__(self):
        if self.hausdorff_lower > self.hausdorff_upper:
            raise DomainError("lower dimension bound exceeds the upper bound")

    def to_json(self) -> dict:
        return {"hausdorff_lower": self.hausdorff_lower, "hausdorff_upper": self.hausdorff_upper,
                "box_upper": self.box_upper, "method": self.method}


@dataclass(frozen=True)
class ThicknessReport:
    value: Fraction
    exact: bool
    truncated: bool
    depth: int
    records: tuple = field(default=(), repr=False)  # ((left bridge, gap, right bridge), ...)

    def to_json(self) -> dict:
        return {"value": str(self.value), "exact": self.exact, "truncated": self.truncated,
                "depth": self.depth}


def moran_dimension(s, tol: float = 1e-12) -> float:
    """Root of ``sum r_i**s = 1`` by bisection.

    Stops when both the residual and the bracket are below ``tol``.  Accepts
    an :class:`AffineIFS` or a plain sequence of ratios.
    """
    ratios = [float(r) for r in (s.ratios if isinstance(s, AffineIFS) else s)]
    if len(ratios) < 2 or any(not 0 < r < 1 for r in ratios):
        raise DomainError("need at least two ratios in (0, 1)")

    def f(x):
        return math.fsum(r ** x for r in ratios) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2
    # run to float resolution; tol only has to be met, not just barely
    while True:
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    best = min((lo, hi), key=lambda x: abs(f(x)))
    if abs(f(best)) > tol:
        raise DomainError(f"residual {abs(f(best)):.3g} above tol {tol:.3g} at float resolution")
    return best


def dimension_report(s: CantorSet, tol: float = 1e-12) -> DimensionReport:
    if isinstance(s, AffineIFS):
        d = moran_dimension(s, tol)
        return DimensionReport(d, d, d, "moran")
    if isinstance(s, GapSchedule):
        # positive Lebesgue measure forces dimension 1
        return DimensionReport(1.0, 1.0, 1.0, "positive-measure")
    if isinstance(s, FiniteUnion):
        reps = [dimension_report(p, tol) for p in s.parts]
        return DimensionReport(max(r.hausdorff_lower for r in reps),
                               max(r.hausdorff_upper for r in reps),
                               max(r.box_upper for r in reps), "union-max")
    raise DomainError(f"no dimension rule for {type(s).__name__}")


def product_dimension_bounds(a: DimensionReport, b: DimensionReport) -> DimensionReport:
    """Hausdorff bounds for a product: ``[low_a + low_b, up_a + box_b]``."""
    return DimensionReport(a.hausdorff_lower + b.hausdorff_lower,
                           a.hausdorff_upper + b.box_upper,
                           a.box_upper + b.box_upper, "product")


def _walk(s: CantorSet, depth: int):
    """(left bridge, gap, right bridge) for every gap opened up to ``depth``.

    A bridge is the hull of the part of the set in the child cell adjacent to
    the gap, at the same depth as the gap's parent cell.
    """
    out = []
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for a in frontier:
            kids = s.children(a)
            cells = [s.cell(k) for k in kids]
            for x, y in zip(cells, cells[1:]):
                out.append((x.width, y.lo - x.hi, y.width))
            nxt.extend(kids)
        frontier = nxt
    return out


def thickness(s: CantorSet, depth: int = 10) -> ThicknessReport:
    """Newhouse thickness: inf over gaps of min(adjacent bridges) / gap.

    Exact for two-map IFS, where every gap and its bridges are a similar copy
    of the first-level configuration.  Otherwise the minimum over gaps up
    to ``depth`` is reported with ``truncated=True``.
    """
    if depth < 1:
        raise DomainError("depth must be at least 1")
    if isinstance(s, AffineIFS) and len(s.maps) == 2:
        recs = _walk(s, 1)
        l, g, r = recs[0]
        return ThicknessReport(min(l, r) / g, True, False, 1, tuple(recs))
    recs = _walk(s, depth)
    val = min(min(l, r) / g for l, g, r in recs)
    return ThicknessReport(val, False, True, depth, tuple(recs))
