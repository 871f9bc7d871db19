import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cantorcert.cantor import AffineIFS, GapSchedule
from cantorcert.construct import build_chain
from cantorcert.errors import DepthTooLarge, NoRealization
from cantorcert.interval import Box2, Interval
from cantorcert.oracle import (certificate_clouds, default_tolerance, epsilon_cover, max_gap,
                               realize_chain, sample_points, sampled_pinned_set)
from cantorcert.phi import DotProduct, Euclidean, PNorm


def test_sample_points_middle_thirds(mt):
    assert sample_points(mt, 0).points == (0,)
    assert sample_points(mt, 1).points == (0, F(2, 3))
    assert sample_points(mt, 2).points == (0, F(2, 9), F(2, 3), F(8, 9))


def test_sample_points_gap_schedule(fat):
    pts = sample_points(fat, 2).points
    assert len(pts) == 4
    for p, a in zip(pts, fat.addresses(2)):
        assert p in fat.cell(a)


def test_depth_limits(mt):
    with pytest.raises(DepthTooLarge):
        sample_points(mt, 17)
    with pytest.raises(DepthTooLarge):
        sample_points(mt, -1)
    assert len(sample_points(mt, 17, max_depth=17)) == 2 ** 17


@pytest.mark.parametrize("d", range(0, 7))
def test_clouds_are_nested(mt, fat, d):
    for s in (mt, fat):
        assert set(sample_points(s, d).points) <= set(sample_points(s, d + 1).points)


def test_sampled_pinned_set_small(mt):
    A = sample_points(mt, 1)
    S = sampled_pinned_set(Euclidean(), (0, 0), A, A)
    expect = sorted({0.0, 2 / 3, 2 * math.sqrt(2) / 3})
    assert np.allclose(S.values, expect, rtol=0, atol=1e-15)
    assert len(S) == 3


def test_exact_and_float_dedup_agree(mt, fat):
    A, B = sample_points(mt, 5), sample_points(fat, 5)
    for phi in (Euclidean(), DotProduct(), PNorm(3)):
        ex = sampled_pinned_set(phi, (2, 1), A, B, exact=True).values
        fl = sampled_pinned_set(phi, (2, 1), A, B, exact=False).values
        assert len(ex) <= len(fl)
        assert np.allclose(np.unique(np.round(fl, 12)), np.unique(np.round(ex, 12)))


def test_max_gap():
    J = Interval(0, 1)
    assert max_gap(np.array([0.25, 0.5]), J) == 0.5
    assert max_gap(np.array([]), J) == 1.0
    assert max_gap(np.array([-3.0, 0.1, 0.9, 7.0]), J) == pytest.approx(0.8)


def test_epsilon_cover_thick_pair():
    K1 = AffineIFS.middle_thirds().cell_set((0, 0, 1))
    K2 = GapSchedule(K1.hull, F(1, 108), F(1, 2))
    J = Interval(F(269312, 100000), F(270184, 100000))
    rep = epsilon_cover(Euclidean(), (2, 2), K1, K2, J, eps=1e-3, depth=14)
    assert rep.ok and rep.max_gap <= 1e-3


def test_epsilon_cover_detects_a_gap(mt):
    # dot with (1, 0) sees only the first coordinate, and K misses (1/3, 2/3)
    rep = epsilon_cover(DotProduct(), (1, 0), mt, mt, Interval(0, 1), eps=0.1, depth=8)
    assert not rep.ok and rep.max_gap >= F(1, 3) - 1e-12


@pytest.fixture(scope="module")
def chain2():
    return build_chain(AffineIFS.middle_thirds(), 2)


def test_realize_chain(chain2):
    clouds = certificate_clouds(chain2, 12)
    labs = sorted(clouds)
    rng = random.Random(0)
    tol = 1e-3
    for _ in range(3):
        t = [rng.uniform(float(j.lo), float(j.hi)) for j in chain2.box]
        y0 = (chain2.records[(0,)].point,) * 2
        pts = realize_chain(Euclidean(), y0, t, [clouds[l] for l in labs], tol)
        chain = [tuple(map(float, y0))] + [tuple(map(float, p)) for p in pts]
        assert len(set(chain)) == len(chain)
        for k, (p, q) in enumerate(zip(chain, chain[1:])):
            assert abs(math.dist(p, q) - t[k]) <= tol


def test_realize_chain_fails_far_outside(chain2):
    clouds = certificate_clouds(chain2, 8)
    labs = sorted(clouds)
    y0 = (chain2.records[(0,)].point,) * 2
    with pytest.raises(NoRealization) as info:
        realize_chain(Euclidean(), y0, [50.0, 50.0], [clouds[l] for l in labs], 1e-3)
    assert info.value.best_error > 1


def test_realize_single_link():
    K1 = AffineIFS.middle_thirds().cell_set((0, 0, 1))
    K2 = GapSchedule(K1.hull, F(1, 108), F(1, 2))
    clouds = (sample_points(K1, 12), sample_points(K2, 12))
    (p,) = realize_chain(Euclidean(), (2, 2), [2.7], [clouds], 1e-3)
    assert abs(math.dist((2, 2), tuple(map(float, p))) - 2.7) <= 1e-3


def test_default_tolerance(mt):
    assert default_tolerance(mt, 2) == 1.0
    assert default_tolerance(mt, 14) == pytest.approx(3.0 ** -12)


@given(st.integers(0, 5), st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))
def test_samples_lie_in_cells(d, x, y):
    K = AffineIFS.uniform(F(2, 5))
    cloud = sample_points(K, d)
    for p, a in zip(cloud.points, K.addresses(d)):
        assert p in K.cell(a)
    S = sampled_pinned_set(Euclidean(), (x, y), cloud, cloud)
    box = Box2(K.hull, K.hull)
    enc = Euclidean().enclose(Box2.point((x, y)), box)
    assert float(enc.lo) - 1e-12 <= S.values.min() and S.values.max() <= float(enc.hi) + 1e-12
