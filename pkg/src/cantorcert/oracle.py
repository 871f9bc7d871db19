"""Brute-force sampling oracle, independent of the certification path.

Samples are member points of all cells of a fixed depth, so every sample is a
genuine point of the set and the depth-n cloud contains the depth-m cloud for
m <= n.  Distances are computed in floating point (or exactly, for small
clouds) and used to cross-check certificates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .cantor import AffineIFS, CantorSet
from .errors import DepthTooLarge, NoRealization
from .interval import Interval
from .phi import DotProduct, PhiFunction, PNorm
from .trees import LabeledTree, kb_order

MAX_DEPTH = 16


@dataclass(frozen=True)
class SampleCloud:
    set: CantorSet
    depth: int
    points: tuple

    @property
    def array(self) -> np.ndarray:
        return np.array([float(p) for p in self.points])

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class SampledDistanceSet:
    pin: tuple
    phi: PhiFunction
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def _ifs_points(s: AffineIFS, depth: int) -> list:
    pts = [s.fixed_point]
    for _ in range(depth):
        pts = [r * p + t for r, t in s.maps for p in pts]
    return pts


def sample_points(s: CantorSet, depth: int, max_depth: int = MAX_DEPTH) -> SampleCloud:
    """Member points of every depth-``depth`` cell, sorted and exact."""
    if depth < 0:
        raise DepthTooLarge("depth must be nonnegative")
    if depth > max_depth:
        raise DepthTooLarge(f"depth {depth} exceeds the maximum {max_depth}")
    if isinstance(s, AffineIFS):
        pts = _ifs_points(s, depth)
    else:
        pts = [s.member_point(a) for a in s.addresses(depth)]
    return SampleCloud(s, depth, tuple(sorted(set(pts))))


def sampled_pinned_set(phi: PhiFunction, z, A: SampleCloud, B: SampleCloud,
                       exact: Optional[bool] = None) -> SampledDistanceSet:
    """All values ``phi(z, (a, b))`` over the two clouds, sorted and deduplicated.

    Exact deduplication (through a rational key) is used for clouds up to
    ``2**16`` pairs unless ``exact`` says otherwise.
    """
    if exact is None:
        exact = len(A) * len(B) <= 2 ** 16
    if exact:
        zq = (Fraction(z[0]), Fraction(z[1]))
        keys = sorted({phi.exact_key(zq, (a, b)) for a in A.points for b in B.points})
        vals = np.array([phi.key_to_value(k) for k in keys])
    else:
        X, Y = np.meshgrid(A.array, B.array, indexing="ij")
        vals = np.unique(phi.values_np(float(z[0]), float(z[1]), X, Y).ravel())
    return SampledDistanceSet(tuple(z), phi, vals)


def max_gap(values: np.ndarray, J: Interval) -> float:
    """Largest gap left by ``values`` inside ``J`` (endpoints count as gaps)."""
    lo, hi = float(J.lo), float(J.hi)
    v = np.asarray(values, dtype=float)
    v = v[(v >= lo) & (v <= hi)]
    pts = np.concatenate(([lo], np.sort(v), [hi]))
    return float(np.max(np.diff(pts))) if len(pts) > 1 else hi - lo


def _values_in(phi, z, a: np.ndarray, b: np.ndarray, J: Interval, chunk: int = 2 ** 22):
    """phi-values of all pairs that land in J, computed in row blocks."""
    lo, hi = float(J.lo), float(J.hi)
    rows = max(1, chunk // max(len(b), 1))
    out = []
    for i in range(0, len(a), rows):
        v = phi.values_np(float(z[0]), float(z[1]), a[i:i + rows, None], b[None, :]).ravel()
        out.append(v[(v >= lo) & (v <= hi)])
    return np.concatenate(out) if out else np.empty(0)


@dataclass(frozen=True)
class CoverReport:
    pin: tuple
    depth: int
    max_gap: float
    ok: bool


def epsilon_cover(phi: PhiFunction, z, K1: CantorSet, K2: CantorSet, J: Interval,
                  eps: float = 1e-3, depth: int = 14, start_depth: int = 4) -> CoverReport:
    """Does the depth-``depth`` sampled pinned set leave no gap wider than ``eps`` in J?

    Clouds are nested, so a gap bound found at a coarser depth also holds at
    ``depth``; the check refines from ``start_depth`` and stops as soon as the
    bound is met.
    """
    gap = float(J.width)
    used = start_depth
    for d in range(min(start_depth, depth), depth + 1):
        used = d
        vals = _values_in(phi, z, sample_points(K1, d).array, sample_points(K2, d).array, J)
        gap = min(gap, max_gap(vals, J))
        if gap <= eps:
            break
    return CoverReport(tuple(z), used, gap, gap <= eps)


def default_tolerance(s: CantorSet, depth: int) -> float:
    return float(s.hull.width * s.max_ratio ** (depth - 2))


def _candidates_b(phi: PhiFunction, z, a: np.ndarray, t: float) -> list:
    """Second coordinates b solving phi(z, (a, b)) = t for each a (NaN where none)."""
    z1, z2 = float(z[0]), float(z[1])
    if isinstance(phi, PNorm):
        p = phi.p
        rem = t ** p - np.abs(a - z1) ** p
        with np.errstate(invalid="ignore"):
            root = np.where(rem >= 0, np.abs(rem) ** (1.0 / p), np.nan)
        return [z2 + root, z2 - root]
    if isinstance(phi, DotProduct):
        if z2 == 0:
            return [np.full_like(a, np.nan)]
        return [(t - z1 * a) / z2]
    raise NotImplementedError(f"no inverse for {phi!r}")


def _realize_link(phi, z, t, A: SampleCloud, B: SampleCloud, used: set):
    a_f, b_f = A.array, B.array
    best = (np.inf, None)
    for cand in _candidates_b(phi, z, a_f, t):
        ok = np.isfinite(cand)
        if not ok.any():
            continue
        idx = np.searchsorted(b_f, np.where(ok, cand, 0.0))
        for j in (idx - 1, idx):
            j = np.clip(j, 0, len(b_f) - 1)
            err = np.abs(phi.values_np(float(z[0]), float(z[1]), a_f, b_f[j]) - t)
            err = np.where(ok, err, np.inf)
            for i in np.argsort(err)[:8]:
                if err[i] >= best[0]:
                    break
                pt = (A.points[i], B.points[int(j[i])])
                if pt not in used:
                    best = (float(err[i]), pt)
                    break
    return best


def realize_tree(phi: PhiFunction, tree: LabeledTree, y0, target, clouds: Mapping,
                 tol: float) -> dict:
    """Greedily place points so that each edge value is within ``tol`` of its target.

    ``target`` is a vector in :func:`kb_order` order (or a mapping from child
    label to value) and ``clouds`` maps each non-root label to its pair of
    sample clouds.  Returns ``{label: point}`` including the root ``y0``.
    """
    order = kb_order(tree)
    if not isinstance(target, Mapping):
        target = {c: t for (_, c), t in zip(order, target)}
    pts = {(0,): (Fraction(y0[0]), Fraction(y0[1]))}
    used = {pts[(0,)]}
    for parent, child in order:
        A, B = clouds[child]
        err, pt = _realize_link(phi, pts[parent], float(target[child]), A, B, used)
        if pt is None or err > tol:
            raise NoRealization(f"edge to vertex {child}: best error {err:.3g} > tol {tol:.3g}",
                                best_error=err)
        pts[child] = pt
        used.add(pt)
    return pts


def realize_chain(phi: PhiFunction, y0, target: Sequence, clouds: Sequence, tol: float) -> list:
    """Points ``y^1 .. y^n`` with ``phi(y^{i-1}, y^i)`` within ``tol`` of ``target[i-1]``."""
    n = len(target)
    tree = LabeledTree.chain(n)
    labels = [(0,) * (k + 2) for k in range(n)]
    got = realize_tree(phi, tree, y0, list(target), dict(zip(labels, clouds)), tol)
    return [got[lab] for lab in labels]


def certificate_clouds(tc, depth: int) -> dict:
    """Sample clouds of every link of a chain/tree certificate."""
    return {lab: (sample_points(K1, depth), sample_points(Kt, depth))
            for lab, (K1, Kt) in tc.clouds().items()}

