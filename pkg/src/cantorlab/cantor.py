"""Exact arithmetic for the middle-third Cantor set and its natural measure.

The natural measure mu is the distribution of sum(d_i * 3**-i) with digits
d_i drawn uniformly from {0, 2}.  Its CDF F (the devil's staircase) maps
ternary structure to binary: read the ternary digits of x, halve them, and
reinterpret in base 2, stopping with a final carry at the first digit 1.
For rational x the digit stream is eventually periodic, so F(x) is an exact
rational and every measure or counting question below is answered exactly.

Counting of construction endpoints (the rationals a/3**N whose ternary
digits avoid 1) is done with a most-significant-digit-first digit DP over
tight-lower/tight-upper states, linear in N per query.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

RationalLike = Union[Fraction, int, float, str]

#: Safety cap on ternary digit expansion length.  A rational hits a digit 1
#: or cycles long before this unless it lies on (or encodes) a Cantor point
#: with an astronomically long ternary period.
MAX_DIGIT_STEPS = 500_000


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce to an exact Fraction.  Floats convert exactly (base-2 value)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def cantor_cdf(x: RationalLike) -> Fraction:
    """F(x) = mu([0, x]) for x in [0, 1], exactly.

    Walks the ternary digits of x, detecting the eventual cycle through the
    remainder state.  Digits before the first 1 contribute (d/2) * 2**-i;
    a digit 1 at position j contributes a final 2**-j; if no 1 ever occurs
    (x is in the Cantor set) the halved digit stream is itself eventually
    periodic and is summed as an exact binary rational.
    """
    x = as_fraction(x)
    if not 0 <= x <= 1:
        raise ValueError(f"cantor_cdf argument {x} outside [0, 1]")
    if x == 1:
        return Fraction(1)
    p, q = x.numerator, x.denominator
    seen: dict[int, int] = {}
    accs = [0]          # accs[i] = binary numerator of the first i half-digits
    r = p               # current remainder: value so far is (x - acc/2^i)*3^i
    i = 0
    acc = 0
    while True:
        if r == 0:
            return Fraction(acc, 1 << i)
        j = seen.get(r)
        if j is not None:
            # digits j..i-1 repeat forever; sum prefix + geometric tail
            period = i - j
            pattern = acc - (accs[j] << period)
            denom = (1 << period) - 1
            return Fraction(accs[j] * denom + pattern, denom << j)
        seen[r] = i
        r3 = 3 * r
        d = r3 // q
        r = r3 - d * q
        if d == 1:
            return Fraction((acc << 1) + 1, 1 << (i + 1))
        acc = (acc << 1) + (d >> 1)
        i += 1
        accs.append(acc)
        if i > MAX_DIGIT_STEPS:
            raise ArithmeticError(
                f"ternary expansion of {x} exceeded {MAX_DIGIT_STEPS} digits "
                "without terminating; the exact period is too long")


# --------------------------------------------------------------------------
# Intervals and unions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A subinterval of [0, 1] with independently open/closed endpoints."""

    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if not (0 <= self.lo <= self.hi <= 1):
            raise ValueError(f"interval [{self.lo}, {self.hi}] not inside [0, 1]")
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise ValueError("empty interval")

    def contains(self, x: RationalLike) -> bool:
        x = as_fraction(x)
        if x < self.lo or (x == self.lo and self.lo_open):
            return False
        if x > self.hi or (x == self.hi and self.hi_open):
            return False
        return True

    def reflected(self) -> "Interval":
        """The image under x -> 1 - x."""
        return Interval(1 - self.hi, 1 - self.lo, self.hi_open, self.lo_open)

    def __str__(self):
        l, r = "(" if self.lo_open else "[", ")" if self.hi_open else "]"
        return f"{l}{self.lo}, {self.hi}{r}"


def _mergeable(a: Interval, b: Interval) -> bool:
    # b.lo >= a.lo after sorting; union is a single interval unless there is
    # a genuine gap (or a single missing point between two open endpoints)
    if b.lo > a.hi:
        return False
    if b.lo == a.hi and a.hi_open and b.lo_open:
        return False
    return True


class IntervalUnion:
    """Finite union of disjoint intervals in [0, 1], sorted by left endpoint."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = (), *, merge: bool = True):
        ivs = sorted(intervals, key=lambda iv: (iv.lo, iv.lo_open))
        if merge:
            merged: list[Interval] = []
            for iv in ivs:
                if merged and _mergeable(merged[-1], iv):
                    last = merged.pop()
                    if (iv.hi, not iv.hi_open) > (last.hi, not last.hi_open):
                        hi, hi_open = iv.hi, iv.hi_open
                    else:
                        hi, hi_open = last.hi, last.hi_open
                    merged.append(Interval(last.lo, hi, last.lo_open, hi_open))
                else:
                    merged.append(iv)
            ivs = merged
        else:
            for a, b in zip(ivs, ivs[1:]):
                if _mergeable(a, b) and not (a.hi == b.lo and (a.hi_open or b.lo_open)):
                    raise ValueError(f"overlapping intervals {a} and {b}")
        self.intervals = tuple(ivs)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalUnion) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def contains(self, x: RationalLike) -> bool:
        x = as_fraction(x)
        return any(iv.contains(x) for iv in self.intervals)

    def reflected(self) -> "IntervalUnion":
        return IntervalUnion(iv.reflected() for iv in self.intervals)

    def total_length(self) -> Fraction:
        return sum((iv.hi - iv.lo for iv in self.intervals), Fraction(0))

    def __str__(self):
        return " u ".join(str(iv) for iv in self.intervals) or "{}"


FULL_UNIT = IntervalUnion([Interval(Fraction(0), Fraction(1))])


def measure_union(u: IntervalUnion) -> Fraction:
    """mu of a finite interval union, exactly.

    Endpoint openness is irrelevant: mu is non-atomic, so single points
    carry no mass and mu of each piece is F(hi) - F(lo).
    """
    return sum((cantor_cdf(iv.hi) - cantor_cdf(iv.lo) for iv in u), Fraction(0))


# --------------------------------------------------------------------------
# Restricted-digit counting
# --------------------------------------------------------------------------

def _ternary_digits(a: int, n_digits: int) -> list[int]:
    digits = [0] * n_digits
    for i in range(n_digits - 1, -1, -1):
        a, digits[i] = divmod(a, 3)
    return digits


def count_restricted_range(N: int, lo_int: int, hi_int: int) -> int:
    """#{a in [lo_int, hi_int] : 0 <= a < 3**N, ternary digits all 0 or 2}.

    Most-significant-digit-first DP over (tight-lower, tight-upper) states;
    the free/free state has the closed form 2**(digits remaining).
    """
    lo_int = max(lo_int, 0)
    hi_int = min(hi_int, 3 ** N - 1)
    if lo_int > hi_int:
        return 0
    dlo = _ternary_digits(lo_int, N)
    dhi = _ternary_digits(hi_int, N)

    def rec(i: int, tight_lo: bool, tight_hi: bool) -> int:
        if not tight_lo and not tight_hi:
            return 1 << (N - i)
        if i == N:
            return 1
        total = 0
        for d in (0, 2):
            if tight_lo and d < dlo[i]:
                continue
            if tight_hi and d > dhi[i]:
                continue
            total += rec(i + 1, tight_lo and d == dlo[i], tight_hi and d == dhi[i])
        return total

    return rec(0, True, True)


def count_restricted(N: int, lo: RationalLike, hi: RationalLike, *,
                     lo_open: bool = False, hi_open: bool = False) -> int:
    """#{a : 0 <= a < 3**N, digits of a in {0,2}, lo <= a/3**N <= hi}.

    Strict endpoint comparisons are selected with lo_open / hi_open.
    """
    if N < 0:
        raise ValueError("level must be nonnegative")
    lo, hi = as_fraction(lo), as_fraction(hi)
    if lo > hi:
        raise ValueError(f"empty range: lo={lo} > hi={hi}")
    pow3 = 3 ** N
    scaled_lo = lo * pow3
    scaled_hi = hi * pow3
    a_min = math.floor(scaled_lo) + 1 if lo_open else math.ceil(scaled_lo)
    a_max = math.ceil(scaled_hi) - 1 if hi_open else math.floor(scaled_hi)
    return count_restricted_range(N, a_min, a_max)


def count_endpoints_in_union(N: int, u: IntervalUnion) -> int:
    """|C_N intersect u| where C_N = L_N union R_N.

    Left endpoints are counted with the digit DP per interval; right
    endpoints via the reflection R_N = {1 - x : x in L_N}, i.e. by counting
    L_N inside the reflected union.  Intervals are disjoint, so sums over
    them cannot double count; L_N and R_N are disjoint sets of points.
    """
    total = 0
    for iv in u:
        total += count_restricted(N, iv.lo, iv.hi,
                                  lo_open=iv.lo_open, hi_open=iv.hi_open)
        riv = iv.reflected()
        total += count_restricted(N, riv.lo, riv.hi,
                                  lo_open=riv.lo_open, hi_open=riv.hi_open)
    return total


def left_endpoints(N: int) -> Iterator[Fraction]:
    """All 2**N left endpoints of the level-N construction intervals."""
    pow3 = 3 ** N
    for digits in itertools.product((0, 2), repeat=N):
        a = 0
        for d in digits:
            a = 3 * a + d
        yield Fraction(a, pow3)


def level_endpoints(N: int) -> list[Fraction]:
    """C_N = L_N union R_N as a sorted list (2**(N+1) points for N >= 1)."""
    lefts = list(left_endpoints(N))
    pts = set(lefts)
    pts.update(1 - x for x in lefts)
    return sorted(pts)
