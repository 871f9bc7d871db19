import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cantorcert.errors import DomainError
from cantorcert.interval import FAST, Box2, Interval, iv_sqrt_enclose
from cantorcert.phi import (DotProduct, Euclidean, PNorm, Sign, arith_for_mode,
                            check_derivative_condition, hull_image, parse_phi, robust_image,
                            split_until_definite)

B34 = Box2(Interval(3, 4), Interval(3, 4))
PHIS = [Euclidean(), PNorm(1), PNorm(3), DotProduct()]


def test_hull_image_examples():
    e = Euclidean()
    h = hull_image(e, (0, 0), B34)
    assert h.contains(Interval(iv_sqrt_enclose(Interval(18, 18)).hi, iv_sqrt_enclose(Interval(32, 32)).lo))
    assert h.lo ** 2 <= 18 and h.hi ** 2 >= 32
    assert h.width - (math.sqrt(32) - math.sqrt(18)) < 1e-11
    inner = hull_image(e, (F(7, 2), F(7, 2)), B34)
    assert inner.lo == 0 and inner.hi ** 2 >= F(1, 2) and inner.hi - math.sqrt(0.5) < 1e-11
    assert hull_image(DotProduct(), (1, 2), Box2(Interval(0, 1), Interval(0, 1))) == Interval(0, 3)


def test_robust_image_example():
    U = Box2(Interval(0, F(1, 10)), Interval(0, F(1, 10)))
    r = robust_image(Euclidean(), U, B34)
    assert abs(float(r.lo) - math.sqrt(18)) < 1e-11
    assert abs(float(r.hi) - 3.9 * math.sqrt(2)) < 1e-11
    # inner bound: L rounded up, H rounded down
    assert r.lo ** 2 >= 18 and r.hi ** 2 <= 2 * F(39, 10) ** 2


def test_robust_image_grid_oracle():
    # brute force: every t in [L, H] is hit on B for every pin of a 10x10 grid of U
    U = Box2(Interval(0, F(1, 10)), Interval(0, F(1, 10)))
    r = robust_image(Euclidean(), U, B34)
    g = np.linspace(0, 0.1, 10)
    zx, zy = np.meshgrid(g, g)
    mins = np.hypot(np.maximum(3 - zx, 0), np.maximum(3 - zy, 0))
    maxs = np.hypot(4 - zx, 4 - zy)
    assert mins.max() <= float(r.lo) + 1e-12
    assert maxs.min() >= float(r.hi) - 1e-12


def test_point_pin_matches_hull_image():
    z = (F(1, 2), F(-1, 3))
    for phi in (PNorm(1), DotProduct()):
        assert robust_image(phi, Box2.point(z), B34) == hull_image(phi, z, B34)
    # with a root the inner and outer roundings differ by at most one dyadic step each
    for phi in (Euclidean(), PNorm(3)):
        r, h = robust_image(phi, Box2.point(z), B34), hull_image(phi, z, B34)
        assert h.contains(r)
        assert r.lo - h.lo <= F(1, 2 ** 39) and h.hi - r.hi <= F(1, 2 ** 39)


def test_wide_pin_box_is_empty():
    U = Box2(Interval(-10, 10), Interval(-10, 10))
    assert robust_image(Euclidean(), U, B34) is None


def test_derivative_condition():
    e = Euclidean()
    # pins with z2 in Lambda2 = [0.4, 0.6], y-cell below it: dy must be negative
    A = Box2(Interval(2, 3), Interval(F(2, 5), F(3, 5)))
    B = Box2(Interval(0, F(1, 3)), Interval(0, F(1, 4)))
    rep = check_derivative_condition(e, A, B)
    assert rep.satisfied and rep.signs == (Sign.NEGATIVE, Sign.NEGATIVE)
    d = DotProduct()
    rep = check_derivative_condition(d, Box2(Interval(-1, 1), Interval(1, 2)), B)
    assert rep.signs[0] is Sign.INDETERMINATE and not rep.satisfied
    rep = check_derivative_condition(d, Box2(Interval(1, 2), Interval(1, 2)), B)
    assert rep.signs == (Sign.POSITIVE, Sign.POSITIVE)


def test_derivative_undefined_at_pin():
    rep = check_derivative_condition(Euclidean(), B34, B34)
    assert not rep.satisfied


def test_split_until_definite():
    d = DotProduct()
    A = Box2(Interval(-1, 1), Interval(1, 2))
    B = Box2(Interval(0, 1), Interval(0, 1))
    definite, residual = split_until_definite(d, A, B, max_depth=4)
    assert definite
    for a, b in definite:
        assert check_derivative_condition(d, a, b).satisfied
    for a, b in residual:
        assert a.x.contains(0)


def test_parse_phi():
    assert parse_phi("euclidean") == Euclidean()
    assert parse_phi("pnorm p=3") == PNorm(3)
    assert parse_phi({"kind": "pnorm", "p": 4}) == PNorm(4)
    assert parse_phi("dot") == DotProduct()
    with pytest.raises(DomainError):
        parse_phi("cosine")
    with pytest.raises(DomainError):
        PNorm(F(3, 2))
    with pytest.raises(DomainError):
        PNorm(0)


def test_fast_mode_encloses_exact():
    U = Box2(Interval(0, F(1, 10)), Interval(0, F(1, 10)))
    for phi in PHIS:
        ex = robust_image(phi, U, B34, arith_for_mode("exact"))
        fa = robust_image(phi, U, B34, FAST)
        if ex is None:
            assert fa is None
            continue
        # fast inner bounds may only be smaller
        assert F(fa.lo) >= ex.lo - F(1, 10 ** 9) and F(fa.hi) <= ex.hi + F(1, 10 ** 9)


box_coord = st.fractions(min_value=-5, max_value=5, max_denominator=64)


@st.composite
def boxes(draw):
    xs = sorted([draw(box_coord), draw(box_coord)])
    ys = sorted([draw(box_coord), draw(box_coord)])
    return Box2(Interval(*xs), Interval(*ys))


@pytest.mark.parametrize("phi", PHIS, ids=repr)
@given(U=boxes(), B=boxes(), seed=st.integers(0, 2 ** 32))
def test_enclosure_soundness(phi, U, B, seed):
    rng = random.Random(seed)

    def pick(iv):
        return iv.lo + (iv.hi - iv.lo) * F(rng.randint(0, 64), 64)

    z = (pick(U.x), pick(U.y))
    h = hull_image(phi, z, B)
    p = (pick(B.x), pick(B.y))
    v = phi.value(z, p)
    assert float(h.lo) - 1e-9 <= v <= float(h.hi) + 1e-9
    enc = phi.enclose(U, B)
    assert float(enc.lo) - 1e-9 <= v <= float(enc.hi) + 1e-9
    r = robust_image(phi, U, B)
    if r is not None:
        assert h.contains(r)
        inner = robust_image(phi, Box2.point(z), B)
        assert inner.contains(r)


@pytest.mark.parametrize("phi", PHIS, ids=repr)
@given(U=boxes(), B=boxes(), seed=st.integers(0, 2 ** 32))
def test_robust_image_antitone_in_U(phi, U, B, seed):
    rng = random.Random(seed)
    t = [F(rng.randint(0, 8), 8) for _ in range(4)]
    sub = Box2(Interval(U.x.lo + U.x.width * min(t[0], t[1]), U.x.lo + U.x.width * max(t[0], t[1])),
               Interval(U.y.lo + U.y.width * min(t[2], t[3]), U.y.lo + U.y.width * max(t[2], t[3])))
    big, small = robust_image(phi, U, B), robust_image(phi, sub, B)
    if big is not None:
        assert small is not None and small.contains(big)


@given(A=boxes(), B=boxes(), seed=st.integers(0, 2 ** 32))
def test_partial_signs_match_finite_differences(A, B, seed):
    e = Euclidean()
    rep = check_derivative_condition(e, A, B)
    rng = random.Random(seed)
    for axis, sign in enumerate(rep.signs):
        if sign is Sign.INDETERMINATE:
            continue
        z = (float(A.x.lo + A.x.width * F(rng.random())), float(A.y.lo + A.y.width * F(rng.random())))
        p = [float(B.x.lo + B.x.width * F(rng.random())), float(B.y.lo + B.y.width * F(rng.random()))]
        h = 1e-7
        q = list(p)
        q[axis] += h
        fd = (e.value(z, q) - e.value(z, p)) / h
        if abs(fd) > 1e-5:
            assert (fd > 0) == (sign is Sign.POSITIVE)


def test_vectorized_values_agree():
    rng = np.random.default_rng(0)
    X, Y = rng.uniform(0, 1, 50), rng.uniform(0, 1, 50)
    for phi in PHIS:
        vals = phi.values_np(2.0, -1.0, X, Y)
        assert np.allclose(vals, [phi.value((2.0, -1.0), (x, y)) for x, y in zip(X, Y)])
