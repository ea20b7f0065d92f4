import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cantorlab.cantor import (Interval, IntervalUnion, cantor_cdf,
                              count_endpoints_in_union, count_restricted,
                              left_endpoints, level_endpoints, measure_union)

unit_fractions = st.fractions(min_value=0, max_value=1, max_denominator=10 ** 4)


# --------------------------------------------------------------------------
# Independent oracles
# --------------------------------------------------------------------------

def covering_bracket(x: Fraction, level: int) -> tuple[Fraction, Fraction]:
    """Bracket F(x) by counting construction intervals below / straddling x.

    Walks all 2**level construction intervals [a, a + 3**-level] with
    restricted ternary a; each carries mass 2**-level.  Intervals entirely
    below x contribute fully, straddling ones bound the gap.
    """
    below = straddle = 0
    pow3 = 3 ** level
    for a in _restricted_ints(level):
        if Fraction(a + 1, pow3) <= x:
            below += 1
        elif Fraction(a, pow3) < x:
            straddle += 1
    lo = Fraction(below, 2 ** level)
    return lo, lo + Fraction(straddle, 2 ** level)


def _restricted_ints(level: int):
    """All integers in [0, 3**level) whose ternary digits avoid 1."""
    for a in range(3 ** level):
        v = a
        while v:
            v, d = divmod(v, 3)
            if d == 1:
                break
        else:
            yield a


def brute_count_restricted(N, lo, hi, lo_open=False, hi_open=False):
    pow3 = 3 ** N
    cnt = 0
    for a in _restricted_ints(N):
        sl, sh = lo * pow3, hi * pow3
        ok_lo = a > sl if lo_open else a >= sl
        ok_hi = a < sh if hi_open else a <= sh
        if ok_lo and ok_hi:
            cnt += 1
    return cnt


# --------------------------------------------------------------------------
# CDF
# --------------------------------------------------------------------------

def test_cdj_fixed_values():
    assert cantor_cdf(0) == 0
    assert cantor_cdf(1) == 1
    assert cantor_cdf(Fraction(1, 3)) == Fraction(1, 2)
    assert cantor_cdf(Fraction(2, 3)) == Fraction(1, 2)
    assert cantor_cdf(Fraction(1, 2)) == Fraction(1, 2)
    assert cantor_cdf(Fraction(1, 4)) == Fraction(1, 3)
    assert cantor_cdf(Fraction(3, 4)) == Fraction(2, 3)
    assert cantor_cdf(Fraction(1, 9)) == Fraction(1, 4)


def test_cdf_quarter_against_covering_oracle():
    lo, hi = covering_bracket(Fraction(1, 4), 12)
    assert lo <= Fraction(1, 3) <= hi
    assert hi - lo <= Fraction(2, 2 ** 12)
    assert cantor_cdf(Fraction(1, 4)) == Fraction(1, 3)


@given(unit_fractions)
@settings(max_examples=150)
def test_cdf_symmetry(x):
    assert cantor_cdf(1 - x) == 1 - cantor_cdf(x)


@given(unit_fractions)
@settings(max_examples=150)
def test_cdf_self_similarity(x):
    f = cantor_cdf(x)
    assert cantor_cdf(x / 3) == f / 2
    assert cantor_cdf((x + 2) / 3) == (1 + f) / 2


@given(unit_fractions, unit_fractions)
@settings(max_examples=100)
def test_cdf_monotone(a, b):
    if a > b:
        a, b = b, a
    assert cantor_cdf(a) <= cantor_cdf(b)


def test_cdf_agrees_with_covering_oracle_on_random_rationals():
    rng = random.Random(2024)
    for _ in range(25):
        q = rng.randint(1, 400)
        x = Fraction(rng.randint(0, q), q)
        lo, hi = covering_bracket(x, 10)
        assert lo <= cantor_cdf(x) <= hi


def test_cdf_domain_errors():
    with pytest.raises(ValueError):
        cantor_cdf(Fraction(-1, 2))
    with pytest.raises(ValueError):
        cantor_cdf(Fraction(3, 2))


# --------------------------------------------------------------------------
# Interval unions and measure
# --------------------------------------------------------------------------

def test_measure_examples():
    assert measure_union(IntervalUnion([Interval(0, 1)])) == 1
    gap = IntervalUnion([Interval(Fraction(1, 3), Fraction(2, 3), True, True)])
    assert measure_union(gap) == 0
    two = IntervalUnion([Interval(0, Fraction(1, 9)),
                         Interval(Fraction(2, 9), Fraction(1, 3))])
    assert measure_union(two) == Fraction(1, 2)


def test_union_normalization_and_validation():
    u = IntervalUnion([Interval(Fraction(1, 2), Fraction(3, 4)),
                       Interval(0, Fraction(1, 2))])
    assert len(u) == 1 and u.intervals[0].hi == Fraction(3, 4)
    # two open intervals sharing an endpoint stay separate (point missing)
    u2 = IntervalUnion([Interval(0, Fraction(1, 2), False, True),
                        Interval(Fraction(1, 2), 1, True, False)])
    assert len(u2) == 2
    assert not u2.contains(Fraction(1, 2))
    with pytest.raises(ValueError):
        IntervalUnion([Interval(0, Fraction(2, 3)),
                       Interval(Fraction(1, 3), 1)], merge=False)
    with pytest.raises(ValueError):
        Interval(Fraction(2, 3), Fraction(1, 3))


def test_measure_additive_and_monotone():
    rng = random.Random(7)
    for _ in range(20):
        cuts = sorted(Fraction(rng.randint(0, 60), 60) for _ in range(4))
        a, b, c, d = cuts
        if a == b or c == d or b > c:
            continue
        u1 = IntervalUnion([Interval(a, b)])
        u2 = IntervalUnion([Interval(c, d)]) if c < d else IntervalUnion([])
        both = IntervalUnion([Interval(a, b), Interval(c, d)]) \
            if b < c else IntervalUnion([Interval(a, d)])
        if b < c:
            assert measure_union(both) == measure_union(u1) + measure_union(u2)
        assert measure_union(u1) <= measure_union(IntervalUnion([Interval(a, d)]))


def test_reflection_involution():
    u = IntervalUnion([Interval(Fraction(1, 8), Fraction(1, 4), True, False),
                       Interval(Fraction(1, 2), Fraction(7, 8))])
    assert u.reflected().reflected() == u
    assert measure_union(u.reflected()) == measure_union(u)


# --------------------------------------------------------------------------
# Counting
# --------------------------------------------------------------------------

def test_count_restricted_examples():
    assert count_restricted(1, 0, 1) == 2
    assert count_restricted(2, 0, Fraction(1, 2)) == 2
    assert count_restricted(3, Fraction(1, 3), 1) == 4
    assert count_restricted(0, 0, 1) == 1
    with pytest.raises(ValueError):
        count_restricted(2, Fraction(1, 2), Fraction(1, 3))


def test_count_restricted_full_range_power():
    for N in range(0, 12):
        assert count_restricted(N, 0, 1) == 2 ** N


def test_count_restricted_boundary_strictness():
    # 2/9 is a left endpoint at level 2
    x = Fraction(2, 9)
    assert count_restricted(2, x, x) == 1
    assert count_restricted(2, x, x, lo_open=True) == 0
    assert count_restricted(2, 0, x, hi_open=True) == 1   # only 0 remains
    assert count_restricted(2, 0, x, hi_open=False) == 2


@given(st.integers(0, 9), unit_fractions, unit_fractions,
       st.booleans(), st.booleans())
@settings(max_examples=120, deadline=None)
def test_count_restricted_matches_enumeration(N, lo, hi, lo_open, hi_open):
    if lo > hi:
        lo, hi = hi, lo
    assert count_restricted(N, lo, hi, lo_open=lo_open, hi_open=hi_open) == \
        brute_count_restricted(N, lo, hi, lo_open, hi_open)


def test_count_endpoints_examples():
    full = IntervalUnion([Interval(0, 1)])
    assert count_endpoints_in_union(1, full) == 4       # {0, 2/3, 1/3, 1}
    # exhaustive listing: C_2 = {0, 1/9, 2/9, 1/3, 2/3, 7/9, 8/9, 1}
    third = IntervalUnion([Interval(0, Fraction(1, 3))])
    members = [x for x in level_endpoints(2) if x <= Fraction(1, 3)]
    assert members == [0, Fraction(1, 9), Fraction(2, 9), Fraction(1, 3)]
    assert count_endpoints_in_union(2, third) == len(members) == 4


def test_count_endpoints_full_level():
    full = IntervalUnion([Interval(0, 1)])
    for N in range(1, 10):
        assert count_endpoints_in_union(N, full) == 2 ** (N + 1)
    assert count_endpoints_in_union(0, full) == 2


def test_count_endpoints_matches_enumeration_random_unions():
    rng = random.Random(99)
    for _ in range(60):
        N = rng.randint(0, 10)
        cuts = sorted(Fraction(rng.randint(0, 300), 300) for _ in range(4))
        ivs = []
        if cuts[0] < cuts[1]:
            ivs.append(Interval(cuts[0], cuts[1], rng.random() < .5, rng.random() < .5))
        if cuts[2] < cuts[3] and cuts[2] > cuts[1]:
            ivs.append(Interval(cuts[2], cuts[3], rng.random() < .5, rng.random() < .5))
        u = IntervalUnion(ivs)
        expected = sum(1 for x in level_endpoints(N) if u.contains(x))
        # level_endpoints double-lists nothing; C_0 = {0, 1}
        assert count_endpoints_in_union(N, u) == expected


def test_left_right_disjoint():
    for N in range(1, 8):
        lefts = set(left_endpoints(N))
        rights = {1 - x for x in lefts}
        assert not lefts & rights
        assert len(level_endpoints(N)) == 2 ** (N + 1)
