from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cantorlab.certified import (Enclosure, GAMMA, PrecisionCapExceeded,
                                 as_creal, certified_floor, certify_gt,
                                 compare, cr_max, cr_pow, int_nth_root,
                                 power_enclosure, rational_pow)

# 50 digits of log2/log3, from an independent high-precision evaluation
GAMMA_50 = Fraction(
    "0.63092975357145743709952711434276085429251211512434")


def test_gamma_enclosure_brackets_reference():
    enc = GAMMA.enclosure(96)
    assert GAMMA_50 in enc
    assert enc.width <= Fraction(1, 2 ** 96)


def test_enclosure_tightens_with_precision():
    w64 = GAMMA.enclosure(64).width
    w128 = GAMMA.enclosure(128).width
    assert w128 < w64


def test_compare_decides_and_detects_equality():
    assert compare(GAMMA, as_creal(Fraction("0.630929"))) == 1
    assert compare(GAMMA, as_creal(Fraction("0.630930"))) == -1
    with pytest.raises(PrecisionCapExceeded):
        compare(GAMMA, GAMMA)


def test_certify_gt():
    assert certify_gt(GAMMA, Fraction(63, 100))
    assert not certify_gt(Fraction(63, 100), GAMMA)


def test_certified_floor():
    assert certified_floor(2 * cr_pow(32, Fraction(1, 20))) == 2
    assert certified_floor(as_creal(7) / 2) == 3


def test_max_node():
    m = cr_max(as_creal(Fraction(1, 3)), GAMMA).enclosure(64)
    assert GAMMA_50 in m
    m2 = cr_max(as_creal(2), GAMMA).enclosure(64)
    assert 2 in m2


@given(st.integers(0, 10 ** 6), st.integers(1, 12))
@settings(max_examples=60)
def test_int_nth_root_matches_definition(x, k):
    r, exact = int_nth_root(x, k)
    assert r ** k <= x < (r + 1) ** k
    assert exact == (r ** k == x)


def test_rational_pow_exact_cases():
    assert rational_pow(Fraction(10), Fraction(-2)) == Fraction(1, 100)
    assert rational_pow(Fraction(1024), Fraction(-8, 5)) == Fraction(1, 65536)
    assert rational_pow(Fraction(27, 8), Fraction(2, 3)) == Fraction(9, 4)
    assert rational_pow(Fraction(7), Fraction(0)) == 1
    assert rational_pow(Fraction(10), Fraction(1, 3)) is None


def test_power_enclosure_directed_bounds():
    enc = power_enclosure(1024, Fraction(-1, 20), 64)
    # 1024**-0.05 = 2**-0.5
    ref = Fraction("0.70710678118654752440084436210484903928")
    assert ref in enc
    assert not enc.is_exact
    exact = power_enclosure(10, -2, 64)
    assert exact.is_exact and exact.lo == Fraction(1, 100)


def test_enclosure_arithmetic():
    a = Enclosure(Fraction(1, 3), Fraction(1, 2))
    b = Enclosure.exact(2)
    assert (a + b).lo == Fraction(7, 3)
    assert (a * b).hi == 1
    assert (b / a).lo == 4
    assert (-a).hi == -Fraction(1, 3)
    with pytest.raises(ZeroDivisionError):
        b / Enclosure(Fraction(-1), Fraction(1))
    with pytest.raises(ValueError):
        Enclosure(Fraction(1), Fraction(0))


@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000,
                    max_denominator=10 ** 6))
@settings(max_examples=40)
def test_creal_roundtrip_contains_value(x):
    enc = as_creal(x).enclosure(64)
    assert x in enc


@given(st.fractions(min_value=Fraction(1, 50), max_value=50,
                    max_denominator=1000),
       st.fractions(min_value=Fraction(-3), max_value=3, max_denominator=60))
@settings(max_examples=40, deadline=None)
def test_power_enclosure_consistent_with_float(base, expo):
    enc = power_enclosure(base, expo, 64)
    approx = float(base) ** float(expo)
    assert float(enc.lo) <= approx * 1.000001 + 1e-12
    assert float(enc.hi) >= approx * 0.999999 - 1e-12
