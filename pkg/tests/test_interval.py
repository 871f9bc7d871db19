from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, strategies as st

from cantorcert.errors import DomainError, NegativeDomain
from cantorcert.interval import (EXACT, FAST, Box2, ExactArith, Interval, IntervalUnion,
                                 format_rational, iv_abs, iv_add, iv_div, iv_max, iv_min,
                                 iv_mul, iv_pow, iv_root, iv_sqrt_enclose, iv_sub,
                                 parse_rational, union_covers)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=1000)
floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw, elems=rationals):
    a, b = draw(elems), draw(elems)
    return Interval(min(a, b), max(a, b))


@st.composite
def point_in(draw, iv):
    t = draw(st.fractions(min_value=0, max_value=1, max_denominator=97))
    return iv.lo + (iv.hi - iv.lo) * t


def test_add_examples():
    assert iv_add(Interval(0, 1), Interval(2, 3)) == Interval(2, 4)
    assert iv_add(Interval(0, 0), Interval(F(1, 3), F(1, 2))) == Interval(F(1, 3), F(1, 2))
    assert iv_add(Interval(-1, 1), Interval(-1, 1)) == Interval(-2, 2)


def test_invalid_interval():
    with pytest.raises(DomainError):
        Interval(1, 0)


def test_parse_and_format():
    assert parse_rational("1/3") == F(1, 3)
    assert parse_rational("0.25") == F(1, 4)
    assert parse_rational(" -2 ") == -2
    assert format_rational(F(6, 4)) == "3/2"
    assert format_rational(F(4)) == "4"
    with pytest.raises(DomainError):
        parse_rational("one third")
    assert Interval.parse(["1/3", "0.5"]).to_json() == ["1/3", "1/2"]


def test_sqrt_examples():
    assert iv_sqrt_enclose(Interval(4, 9)) == Interval(2, 3)
    assert iv_sqrt_enclose(Interval(0, 0)) == Interval(0, 0)
    r = iv_sqrt_enclose(Interval(2, 2))
    assert r.width <= F(1, 2 ** 40)
    mpmath.mp.dps = 60
    s2 = mpmath.sqrt(2)
    assert mpmath.mpf(r.lo.numerator) / r.lo.denominator <= s2
    assert mpmath.mpf(r.hi.numerator) / r.hi.denominator >= s2
    with pytest.raises(NegativeDomain):
        iv_sqrt_enclose(Interval(-1, 1))


def test_root_precision_knob():
    r = iv_root(Interval(2, 2), 3, precision=80)
    assert r.width <= F(1, 2 ** 80)
    assert r.lo ** 3 <= 2 <= r.hi ** 3


def test_div_by_zero_interval():
    with pytest.raises(DomainError):
        iv_div(Interval(1, 2), Interval(-1, 1))


def test_abs_pow_min_max():
    assert iv_abs(Interval(-3, 2)) == Interval(0, 3)
    assert iv_abs(Interval(-3, -2)) == Interval(2, 3)
    assert iv_pow(Interval(-2, 1), 2) == Interval(0, 4)
    assert iv_pow(Interval(-2, 1), 3) == Interval(-8, 1)
    assert iv_pow(Interval(5, 7), 0) == Interval(1, 1)
    assert iv_min(Interval(0, 5), Interval(1, 2)) == Interval(0, 2)
    assert iv_max(Interval(0, 5), Interval(1, 2)) == Interval(1, 5)


def test_operators_match_functions():
    a, b = Interval(1, 2), Interval(3, 5)
    assert a + b == iv_add(a, b)
    assert a - b == iv_sub(a, b)
    assert a * b == iv_mul(a, b)
    assert a / b == iv_div(a, b)
    assert -a == Interval(-2, -1)
    assert 1 + a == Interval(2, 3)


def test_float_backend_rounds_outward():
    a = Interval(0.1, 0.1)
    s = a + Interval(0.2, 0.2)
    assert F(s.lo) <= F(0.1) + F(0.2) <= F(s.hi)
    assert s.lo < s.hi
    r = iv_sqrt_enclose(Interval(2.0, 2.0))
    assert F(r.lo) ** 2 <= 2 <= F(r.hi) ** 2


def test_exact_backend_precision():
    ar = ExactArith(10)
    lo, hi = ar.root(F(2), 2, -1), ar.root(F(2), 2, 1)
    assert hi - lo == F(1, 1024)
    assert EXACT.precision == 40 and FAST.name == "fast"


def test_conversions():
    iv = Interval(F(1, 3), F(2, 3))
    f = iv.to_float()
    assert F(f.lo) <= F(1, 3) and F(f.hi) >= F(2, 3)
    assert f.to_exact().contains(iv)
    assert iv.widen(F(1, 3)) == Interval(0, 1)
    assert iv.mid == F(1, 2) and iv.width == F(1, 3)


def test_interval_relations():
    a, b = Interval(0, 1), Interval(2, 3)
    assert not a.intersects(b) and a.intersection(b) is None
    assert a.hull(b) == Interval(0, 3)
    assert a.separation(b) == 1 and b.separation(a) == 1
    assert Interval(0, 2).interior_contains(1) and not Interval(0, 2).interior_contains(0)
    assert F(1, 2) in a


def test_box():
    B = Box2.square((1, 1), F(1, 2))
    assert B == Box2(Interval(F(1, 2), F(3, 2)), Interval(F(1, 2), F(3, 2)))
    assert (1, 1) in B and (2, 1) not in B
    assert Box2.parse(B.to_json()) == B
    assert Box2.point((1, 2)).is_point
    assert B.intersection(Box2.square((2, 2), F(1, 2))) == Box2.point((F(3, 2), F(3, 2)))
    assert B.intersection(Box2.square((5, 5), F(1, 2))) is None


def test_union_covers_examples():
    u = IntervalUnion([Interval(0, 1), Interval(1, 2)]).normalized()
    assert u.parts == (Interval(0, 2),)
    assert union_covers(u, Interval(F(1, 2), F(3, 2)))
    u2 = IntervalUnion([Interval(0, 1), Interval(2, 3)]).normalized()
    assert not union_covers(u2, Interval(F(1, 2), F(5, 2)))
    assert union_covers(IntervalUnion([Interval(0, 1)]), Interval(0, 1))
    assert u2.measure() == 2 and u2.is_normalized()


@given(intervals(), intervals(), st.data())
def test_exact_ops_contain_samples(a, b, data):
    x, y = data.draw(point_in(a)), data.draw(point_in(b))
    assert x + y in iv_add(a, b)
    assert x - y in iv_sub(a, b)
    assert x * y in iv_mul(a, b)
    assert abs(x) in iv_abs(a)
    assert x ** 3 in iv_pow(a, 3)
    if not b.contains(0):
        assert x / y in iv_div(a, b)


@given(intervals(), intervals())
def test_exact_ops_are_tight(a, b):
    # rational endpoints are attained: the result is the exact image
    prods = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
    assert iv_mul(a, b) == Interval(min(prods), max(prods))
    assert iv_add(a, b) == Interval(a.lo + b.lo, a.hi + b.hi)


@given(intervals(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)),
       intervals(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)))
def test_float_ops_enclose_exact_image(a, b):
    ea, eb = a.to_exact(), b.to_exact()
    for fast, exact in ((iv_add(a, b), iv_add(ea, eb)), (iv_sub(a, b), iv_sub(ea, eb)),
                        (iv_mul(a, b), iv_mul(ea, eb))):
        assert F(fast.lo) <= exact.lo and exact.hi <= F(fast.hi)


@given(st.fractions(min_value=0, max_value=10 ** 6, max_denominator=10 ** 6))
def test_sqrt_brackets(q):
    r = iv_sqrt_enclose(Interval(q, q))
    assert r.lo ** 2 <= q <= r.hi ** 2
    assert r.width <= F(1, 2 ** 40)


@given(st.lists(intervals(), min_size=1, max_size=8))
def test_normalize_idempotent(parts):
    u = IntervalUnion(parts).normalized()
    assert u.normalized() == u
    assert u.is_normalized()


@given(st.lists(intervals(st.integers(0, 40).map(F)), min_size=1, max_size=6),
       intervals(st.integers(0, 40).map(F)))
def test_union_covers_matches_grid(parts, j):
    u = IntervalUnion(parts).normalized()
    grid = [j.lo + (j.hi - j.lo) * F(k, 400) for k in range(401)]
    pointwise = all(any(p.contains(t) for p in u.parts) for t in grid)
    # grid spacing is below 1/10 and endpoints are integers, so the grid is exact here
    assert union_covers(u, j) == pointwise
