"""Shrinking dyadic targets and their exact measures and endpoint counts.

The target of order n, offset y and radius sigma is

    T(n, y, sigma) = { x : dist(2**n x - y, Z) < sigma },

which inside [0, 1] is a union of ~2**n open intervals of length
2 sigma / 2**n spaced 2**-n apart.  Building that union explicitly is only
sensible for small n; the measure and endpoint-counting routines instead
recurse down the ternary construction tree of the Cantor set, descending
only into construction intervals that still meet more than one piece of
the target.  Subtrees meeting no piece are dropped (gaps carry no mass and
no endpoints), and a subtree meeting a single piece is finished in closed
form -- a CDF difference for measure, a digit-DP count for endpoints.  The
recursion therefore does O(2**(gamma n)) exact big-integer work, which is
also the true information content of the answer; the node budget turns the
exponential wall into a clean error instead of a stuck process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .cantor import (Interval, IntervalUnion, FULL_UNIT, RationalLike,
                     as_fraction, cantor_cdf, count_restricted_range)
from .certified import CReal, Enclosure, power_enclosure

#: Default cap on recursion-tree nodes for one measure/count query.
DEFAULT_NODE_BUDGET = 1 << 23

#: Cap on explicitly materialized target intervals.
DEFAULT_INTERVAL_BUDGET = 1 << 20


class TargetTooFine(ArithmeticError):
    """The exact computation would exceed its work budget.

    The amount of exact work for one target scales like 2**(gamma*n); past
    roughly n = 35 no budget will save you, which is an intrinsic property
    of the quantity, not of the implementation.
    """

    def __init__(self, message: str, estimate: Optional[int] = None):
        super().__init__(message)
        self.estimate = estimate


class ScaleChainError(ValueError):
    """No admissible coarse level exists (the sigma..delta gap is too narrow)."""


@dataclass(frozen=True)
class ApproxTarget:
    """Target parameters (n, y, sigma) with exact rational y and sigma."""

    n: int
    y: Fraction
    sigma: Fraction

    def __post_init__(self):
        object.__setattr__(self, "y", as_fraction(self.y))
        object.__setattr__(self, "sigma", as_fraction(self.sigma))
        if self.n < 1:
            raise ValueError("target order n must be >= 1")
        if self.sigma <= 0:
            raise ValueError("target radius sigma must be positive")


def build_target_union(t: ApproxTarget, *,
                       max_intervals: int = DEFAULT_INTERVAL_BUDGET) -> IntervalUnion:
    """The target realized inside [0, 1] as an explicit interval union.

    Pieces are open ((b + y - sigma)/2**n, (b + y + sigma)/2**n) over the
    integer window b in [floor(-y-sigma), ceil(2**n - y + sigma)], clipped
    to [0, 1] (a clipped end becomes closed: the boundary point satisfied
    the strict inequality).  For sigma >= 1/2 the condition fails only on a
    finite set, and the convention here is to return all of [0, 1].
    """
    if 2 * t.sigma >= 1:
        return FULL_UNIT
    P = 1 << t.n
    if P + 2 > max_intervals:
        raise TargetTooFine(
            f"explicit union would hold ~2**{t.n} intervals; "
            "use measure_target / count_endpoints_in_target instead",
            estimate=P)
    pieces = []
    b_lo = math.floor(-t.y - t.sigma)
    b_hi = math.ceil(P - t.y + t.sigma)
    for b in range(b_lo, b_hi + 1):
        lo = (b + t.y - t.sigma) / P
        hi = (b + t.y + t.sigma) / P
        if hi <= 0 or lo >= 1:
            continue
        lo_open, hi_open = True, True
        if lo < 0:
            lo, lo_open = Fraction(0), False
        if hi > 1:
            hi, hi_open = Fraction(1), False
        pieces.append(Interval(lo, hi, lo_open, hi_open))
    return IntervalUnion(pieces)


def _piece_resolution_level(n: int, sigma: Fraction) -> int:
    """Smallest level l with 3**-l below the gap between target pieces."""
    gap = 1 - 2 * sigma  # > 0 here
    lhs_cap = (gap.denominator << n)
    level, pow3 = 0, 1
    while pow3 * gap.numerator <= lhs_cap:
        level += 1
        pow3 *= 3
    return level


def _check_budget(n: int, sigma: Fraction, level_cap: Optional[int],
                  max_nodes: int, what: str) -> None:
    level = _piece_resolution_level(n, sigma)
    if level_cap is not None:
        level = min(level, level_cap)
    if (1 << (level + 1)) > max_nodes:  # full binary tree to depth `level`
        raise TargetTooFine(
            f"{what} for n={n} needs about 2**{level + 1} recursion nodes, "
            f"over the budget of {max_nodes}",
            estimate=1 << (level + 1))


def measure_target(t: ApproxTarget, *,
                   max_nodes: int = DEFAULT_NODE_BUDGET) -> Fraction:
    """mu of the target, exactly, equal to measure_union(build_target_union).

    Computed by the pruned ternary-tree recursion described in the module
    docstring rather than by materializing the union.
    """
    if 2 * t.sigma >= 1:
        return Fraction(1)
    _check_budget(t.n, t.sigma, None, max_nodes, "exact measure")

    P = 1 << t.n
    yp, yq = t.y.numerator, t.y.denominator
    sp, sq = t.sigma.numerator, t.sigma.denominator
    D = yq * sq
    T0 = yp * sq - sp * yq          # (y - sigma) * D
    T1 = yp * sq + sp * yq          # (y + sigma) * D
    PD = P * D

    def rec(a: int, pow3: int) -> Fraction:
        den = pow3 * D
        b_min = (P * a * D - pow3 * T1) // den + 1
        num2 = P * (a + 1) * D - pow3 * T0
        b_max = -((-num2) // den) - 1
        if b_min > b_max:
            return Fraction(0)
        if b_min == b_max:
            b = b_min
            lo = max(Fraction(b * D + T0, PD), Fraction(a, pow3))
            hi = min(Fraction(b * D + T1, PD), Fraction(a + 1, pow3))
            return cantor_cdf(hi) - cantor_cdf(lo)
        a3, p3 = 3 * a, 3 * pow3
        return rec(a3, p3) + rec(a3 + 2, p3)

    return rec(0, 1)


def _count_left_in_target(level: int, n: int, y: Fraction, sigma: Fraction,
                          max_nodes: int) -> int:
    """|L_level intersect T(n, y, sigma)| by prefix-tree recursion."""
    P = 1 << n
    if 2 * sigma > 1:
        return 1 << level
    if 2 * sigma == 1:
        # excluded points solve 2**n x - y = m + 1/2; solvable only when
        # 2*yq divides 3**level * (2*yp + yq)
        yp, yq = y.numerator, y.denominator
        if (3 ** level * (2 * yp + yq)) % (2 * yq) != 0:
            return 1 << level
        raise ValueError(
            "endpoint counting with sigma == 1/2 would need to count "
            "boundary hits along a congruence class; not supported")
    _check_budget(n, sigma, level, max_nodes, "endpoint count")

    yp, yq = y.numerator, y.denominator
    sp, sq = sigma.numerator, sigma.denominator
    D = yq * sq
    T0 = yp * sq - sp * yq
    T1 = yp * sq + sp * yq
    PD = P * D
    pow3_level = 3 ** level
    W = pow3_level * yq

    def point_hit(a: int) -> bool:
        # dist(2**n * a/3**level - y, Z) < sigma, exactly
        m = (P * a * yq - yp * pow3_level) % W
        d = min(m, W - m)
        return d * sq < sp * W

    def rec(l: int, a: int, pow3: int) -> int:
        if l == level:
            return 1 if point_hit(a) else 0
        den = pow3 * D
        b_min = (P * a * D - pow3 * T1) // den + 1
        num2 = P * (a + 1) * D - pow3 * T0
        b_max = -((-num2) // den) - 1
        if b_min > b_max:
            return 0
        if b_min == b_max:
            # all remaining digits roam inside one open piece
            b = b_min
            rem = level - l
            pow3_rem = 3 ** rem
            shift = a * pow3_rem
            # s strictly between 3^level*I.lo - shift and 3^level*I.hi - shift
            num_lo = pow3_level * (b * D + T0) - shift * PD
            num_hi = pow3_level * (b * D + T1) - shift * PD
            s_min = num_lo // PD + 1
            s_max = -((-num_hi) // PD) - 1
            return count_restricted_range(rem, s_min, s_max)
        a3, p3 = 3 * a, 3 * pow3
        return rec(l + 1, a3, p3) + rec(l + 1, a3 + 2, p3)

    return rec(0, 0, 1)


def count_endpoints_in_target(level: int, t: ApproxTarget, *,
                              max_nodes: int = DEFAULT_NODE_BUDGET) -> int:
    """|C_level intersect T(n, y, sigma)| without materializing the union.

    Right endpoints are mapped through x -> 1 - x, which carries the target
    for offset y onto the target for offset -y.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    left = _count_left_in_target(level, t.n, t.y, t.sigma, max_nodes)
    right = _count_left_in_target(level, t.n, -t.y, t.sigma, max_nodes)
    return left + right


# --------------------------------------------------------------------------
# Power-law schedules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """The radius schedule n**-tau paired with the coarse scale n**-alpha."""

    tau: Union[Fraction, CReal]
    alpha: Fraction = Fraction(1, 20)

    def eval(self, n: int, precision: int = 128) -> tuple[Enclosure, Enclosure]:
        """Certified rational enclosures of (n**-tau, n**-alpha).

        Relative width is at most 2**-precision; either endpoint can then
        be used as a directed rounding of the true value.  Integer and
        perfect-power cases come back exact.
        """
        if n < 1:
            raise ValueError("schedule index n must be >= 1")
        if precision < 32:
            raise ValueError("precision below 32 bits is not supported")
        sigma = power_enclosure(n, -self.tau, precision)
        delta = power_enclosure(n, -self.alpha, precision)
        return sigma, delta


def schedule_eval(s: Schedule, n: int, precision: int = 128
                  ) -> tuple[Enclosure, Enclosure]:
    return s.eval(n, precision)


# --------------------------------------------------------------------------
# Scale chains and the endpoint-count transfer ratio
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleChain:
    """Levels (N, M) with sigma/2**(n+5) <= 3**-N <= sigma/2**n <= 3**-M <= delta/2**n."""

    n: int
    sigma: Fraction
    delta: Fraction
    N: int
    M: int

    def verify(self) -> bool:
        """Replay all four chain inequalities on exact integers."""
        sp, sq = self.sigma.numerator, self.sigma.denominator
        dp, dq = self.delta.numerator, self.delta.denominator
        p3N, p3M = 3 ** self.N, 3 ** self.M
        return (sp * p3N <= sq << (self.n + 5)
                and sq << self.n <= sp * p3N
                and sp * p3M <= sq << self.n
                and dp * p3M >= dq << self.n)


def make_scale_chain(n: int, sigma: RationalLike, delta: RationalLike) -> ScaleChain:
    """Deterministic chain: minimal fine level N, maximal coarse level M.

    N is the least level with 3**-N <= sigma/2**n (the companion bound
    sigma/2**(n+5) <= 3**-N then holds automatically since 3 < 2**5), and
    M the largest level with 3**-M >= sigma/2**n that still satisfies
    3**-M <= delta/2**n.  All comparisons are exact on big integers.
    """
    sigma, delta = as_fraction(sigma), as_fraction(delta)
    if not (0 < sigma < delta <= 1):
        raise ValueError("need 0 < sigma < delta <= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    sp, sq = sigma.numerator, sigma.denominator
    target = sq << n  # 3**N >= 2**n / sigma  <=>  3**N * sp >= target
    N, p3 = 0, 1
    while p3 * sp < target:
        N += 1
        p3 *= 3
    M = N if p3 * sp == target else N - 1
    if M < 0:
        raise ScaleChainError(f"no admissible coarse level for n={n}")
    dp, dq = delta.numerator, delta.denominator
    if dp * 3 ** M < dq << n:  # 3**-M > delta/2**n
        raise ScaleChainError(
            f"gap too narrow: no power of 3 lies in [2**{n}/delta, 2**{n}/sigma] "
            f"(sigma={sigma}, delta={delta})")
    chain = ScaleChain(n, sigma, delta, N, M)
    assert chain.verify()
    return chain


@dataclass(frozen=True)
class LemmaRatio:
    """Fine/coarse endpoint counts across a scale chain, plus their ratio."""

    chain: ScaleChain
    y: Fraction
    count_fine: int      # |C_N intersect T(n, y, sigma)|
    count_coarse: int    # |C_M intersect T(n, y, 2*delta)|
    ratio: Fraction

    @property
    def n(self) -> int:
        return self.chain.n


def lemma_ratio(n: int, y: RationalLike, sigma: RationalLike,
                delta: RationalLike, *,
                max_nodes: int = DEFAULT_NODE_BUDGET) -> LemmaRatio:
    """Counting ratio |C_N ^ T(n,y,sigma)| / |C_M ^ T(n,y,2 delta)|.

    A zero coarse count forces a zero fine count (every fine endpoint near
    the target pushes a coarse endpoint into the doubled target); in that
    case the ratio is reported as 0.
    """
    y = as_fraction(y)
    chain = make_scale_chain(n, sigma, delta)
    fine = count_endpoints_in_target(
        chain.N, ApproxTarget(n, y, chain.sigma), max_nodes=max_nodes)
    coarse = count_endpoints_in_target(
        chain.M, ApproxTarget(n, y, 2 * chain.delta), max_nodes=max_nodes)
    if coarse == 0:
        if fine != 0:
            raise AssertionError(
                f"fine count {fine} with empty coarse target at n={n}")
        ratio = Fraction(0)
    else:
        ratio = Fraction(fine, coarse)
    return LemmaRatio(chain, y, fine, coarse, ratio)
