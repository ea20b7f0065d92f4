"""The convergence pipeline: constraint check, block sums, dyadic partial
sums, and per-n inequality diagnostics.

The driving inequality for the exponent tau is

    tau * gamma > max(1 - alpha (1 - gamma), beta2 + alpha),

with gamma = log 2 / log 3.  When it holds, the block sums of exact target
measures over n in [N, 2N] decay geometrically along dyadic blocks and the
full series converges; the routines here compute those finite objects
exactly (measures) or with certified enclosures (the comparison powers).

Radii n**-tau are irrational for non-integer tau, so measures are taken at
a certified rational upper rounding of the radius: any convergence
evidence is then conservative (never an understatement of a measure).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .cantor import RationalLike, as_fraction
from .certified import (CReal, Enclosure, GAMMA, PrecisionCapExceeded,
                        as_creal, compare, cr_max, cr_pow)
from .fourier import (GoodBadPartition, classify_good_bad,
                      floor_two_over_delta, mu_hat_scaled)
from .targets import (ApproxTarget, DEFAULT_NODE_BUDGET, Schedule,
                      measure_target)

TauLike = Union[Fraction, int, str, CReal]


def critical_tau() -> CReal:
    """The threshold exponent 1/gamma - 0.01."""
    return as_creal(1) / GAMMA - Fraction(1, 100)


@dataclass(frozen=True)
class ExperimentParams:
    """Exponent, offset, and the fixed split constants of the pipeline."""

    tau: TauLike
    y: Fraction = Fraction(0)
    alpha: Fraction = Fraction(1, 20)
    beta1: Fraction = Fraction(39, 500)    # 0.078
    beta2: Fraction = Fraction(461, 500)   # 0.922
    C: Fraction = Fraction(1)

    def __post_init__(self):
        if not isinstance(self.tau, CReal):
            object.__setattr__(self, "tau", as_fraction(self.tau))
        object.__setattr__(self, "y", as_fraction(self.y))
        for name in ("alpha", "beta1", "beta2", "C"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not self.alpha < self.beta1:
            # the coarse-scale Fourier sum is only bounded when alpha < beta1
            raise ValueError("alpha must be < beta1")
        if self.C <= 0:
            raise ValueError("C must be positive")

    @property
    def tau_creal(self) -> CReal:
        return as_creal(self.tau)

    @property
    def gamma(self) -> CReal:
        return GAMMA

    def schedule(self) -> Schedule:
        return Schedule(self.tau, self.alpha)


@dataclass(frozen=True)
class ConstraintCheck:
    holds: bool
    lhs: Enclosure          # tau * gamma
    rhs: Enclosure          # max(1 - alpha(1-gamma), beta2 + alpha)
    precision_used: int


def constraint_check(params: ExperimentParams, precision: int = 64,
                     prec_cap: int = 4096) -> ConstraintCheck:
    """Certified strict comparison tau*gamma vs the constraint threshold."""
    lhs = params.tau_creal * GAMMA
    rhs = cr_max(1 - as_creal(params.alpha) * (1 - GAMMA),
                 as_creal(params.beta2 + params.alpha))
    prec = precision
    while True:
        llo, lhi = lhs.bounds(prec)
        rlo, rhi = rhs.bounds(prec)
        if lhi < rlo:
            return ConstraintCheck(False, Enclosure(llo, lhi),
                                   Enclosure(rlo, rhi), prec)
        if llo > rhi:
            return ConstraintCheck(True, Enclosure(llo, lhi),
                                   Enclosure(rlo, rhi), prec)
        prec *= 2
        if prec > prec_cap:
            raise PrecisionCapExceeded(
                "constraint comparison undecided at the precision cap")


# --------------------------------------------------------------------------
# Block sums over [N, 2N]
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockEntry:
    """One n of a block: radius enclosure, exact measure, comparison power."""

    n: int
    good: bool
    sigma: Enclosure
    measure: Fraction
    comparator: Enclosure   # delta_n^(1-gamma) sigma_n^gamma if good, else sigma_n^gamma


@dataclass(frozen=True)
class BlockReport:
    N: int
    entries: tuple[BlockEntry, ...]
    partition: GoodBadPartition
    sum_good: Fraction
    sum_bad: Fraction
    bound_good: Enclosure    # sum over the block of n**-(tau*gamma + alpha(1-gamma))
    bound_bad: Enclosure     # N**(beta2 + alpha - tau*gamma)

    @property
    def sum_total(self) -> Fraction:
        return self.sum_good + self.sum_bad

    @property
    def good_count(self) -> int:
        return len(self.partition.good)

    @property
    def bad_count(self) -> int:
        return len(self.partition.bad)


def block_entry(n: int, good: bool, params: ExperimentParams,
                precision: int = 128, max_nodes: int = DEFAULT_NODE_BUDGET,
                comparator_bits: int = 48) -> BlockEntry:
    """One block row: radius enclosure, exact measure (at the upper-rounded
    radius), and the comparison power the split is measured against."""
    sigma, _delta = params.schedule().eval(n, precision)
    mu = measure_target(ApproxTarget(n, params.y, sigma.hi),
                        max_nodes=max_nodes)
    tau, alpha, gamma = params.tau_creal, as_creal(params.alpha), GAMMA
    if good:
        comp_ast = cr_pow(n, -(tau * gamma + alpha * (1 - gamma)))
    else:
        comp_ast = cr_pow(n, -(tau * gamma))
    return BlockEntry(n, good, sigma, mu, comp_ast.enclosure(comparator_bits))


def block_bounds(N: int, params: ExperimentParams,
                 comparator_bits: int = 48) -> tuple[Enclosure, Enclosure]:
    """The block's comparison quantities: the power-sum bound for good n
    and the polynomial bound for the bad count contribution."""
    tau, alpha, gamma = params.tau_creal, as_creal(params.alpha), GAMMA
    exponent = tau * gamma + alpha * (1 - gamma)
    bound_good_ast = as_creal(0)
    for n in range(N, 2 * N + 1):
        bound_good_ast = bound_good_ast + cr_pow(n, -exponent)
    bound_good = bound_good_ast.enclosure(comparator_bits)
    bound_bad = cr_pow(N, as_creal(params.beta2 + params.alpha) - tau * gamma
                       ).enclosure(comparator_bits)
    return bound_good, bound_bad


def block_sum(N: int, params: ExperimentParams, precision: int = 128,
              *, max_nodes: int = DEFAULT_NODE_BUDGET,
              comparator_bits: int = 48) -> BlockReport:
    """Exact measures of the targets for n in [N, 2N], split good/bad.

    Radii are upper roundings of n**-tau (see module docstring), so every
    reported sum is an exact rational upper bound for the true block sum.
    """
    if N < 1:
        raise ValueError("block start N must be >= 1")
    partition = classify_good_bad(N, params, min(precision, 64))
    good_set = set(partition.good)
    entries = tuple(block_entry(n, n in good_set, params, precision,
                                max_nodes, comparator_bits)
                    for n in range(N, 2 * N + 1))
    sum_good = sum((e.measure for e in entries if e.good), Fraction(0))
    sum_bad = sum((e.measure for e in entries if not e.good), Fraction(0))
    bound_good, bound_bad = block_bounds(N, params, comparator_bits)
    return BlockReport(N, entries, partition, sum_good, sum_bad,
                       bound_good, bound_bad)


# --------------------------------------------------------------------------
# Dyadic partial sums
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicBlock:
    k: int
    n_lo: int
    n_hi: int
    block_sum: Fraction
    cumulative: Fraction


def target_measure_at(n: int, params: ExperimentParams, precision: int = 128,
                      max_nodes: int = DEFAULT_NODE_BUDGET) -> Fraction:
    """mu of the target at index n with the upper-rounded radius n**-tau."""
    sigma, _ = params.schedule().eval(n, precision)
    return measure_target(ApproxTarget(n, params.y, sigma.hi),
                          max_nodes=max_nodes)


def dyadic_block_sum(k: int, params: ExperimentParams, precision: int = 128,
                     max_nodes: int = DEFAULT_NODE_BUDGET) -> Fraction:
    """sum of exact target measures over n in [2**k, 2**(k+1)], inclusive."""
    return sum((target_measure_at(n, params, precision, max_nodes)
                for n in range(1 << k, (1 << (k + 1)) + 1)), Fraction(0))


def bc_partial_sums(k_max: int, params: ExperimentParams,
                    precision: int = 128, *,
                    max_nodes: int = DEFAULT_NODE_BUDGET) -> list[DyadicBlock]:
    """Exact dyadic block sums sum_{n=2^k}^{2^(k+1)} mu(target(n)) for k <= k_max.

    Block endpoints are inclusive on both sides (adjacent blocks share one
    n), mirroring the covering sum the series comparison uses.  With the
    constraint satisfied the blocks decay geometrically; the cumulative
    column is the corresponding partial sum.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    out: list[DyadicBlock] = []
    cumulative = Fraction(0)
    for k in range(k_max + 1):
        total = dyadic_block_sum(k, params, precision, max_nodes)
        cumulative += total
        out.append(DyadicBlock(k, 1 << k, 1 << (k + 1), total, cumulative))
    return out


# --------------------------------------------------------------------------
# Per-n inequality diagnostics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InequalityReport:
    """Measured left/right ratios of the four displayed comparisons.

    ratio_measure_vs_sigma_pow:   mu(T(sigma)) / sigma**gamma
    ratio_fourier_transfer:       mu(T(delta)) / (delta (1 + sum |mu_hat|))
    ratio_coarse_vs_delta:        mu(T(delta)) / delta
    ratio_scale_transfer:         mu(T(sigma)) / ((sigma/delta)**gamma mu(T(delta)))

    All radii are the certified upper roundings used for the measures.
    """

    n: int
    sigma: Fraction
    delta: Fraction
    mu_sigma: Fraction
    mu_delta: Fraction
    t_range: int
    fourier_sum: Enclosure
    ratio_measure_vs_sigma_pow: Enclosure
    ratio_fourier_transfer: Enclosure
    ratio_coarse_vs_delta: Enclosure
    ratio_scale_transfer: Optional[Enclosure]


def inequality_report(n: int, params: ExperimentParams, precision: int = 128,
                      *, max_nodes: int = DEFAULT_NODE_BUDGET,
                      ratio_bits: int = 48) -> InequalityReport:
    """Evaluate the four comparison ratios at a single n, exactly on the left."""
    if n < 1:
        raise ValueError("n must be >= 1")
    schedule = params.schedule()
    sigma_enc, delta_enc = schedule.eval(n, precision)
    sigma, delta = sigma_enc.hi, delta_enc.hi
    mu_sigma = measure_target(ApproxTarget(n, params.y, sigma),
                              max_nodes=max_nodes)
    mu_delta = measure_target(ApproxTarget(n, params.y, delta),
                              max_nodes=max_nodes)

    # t range for this n: floor(2 / delta_n) with delta_n = n**-alpha
    t_range = floor_two_over_delta(n, params.alpha)
    mags = [mu_hat_scaled(t, n, max(precision, 64)) for t in range(1, t_range + 1)]
    fsum = Enclosure(sum((m.lo for m in mags), Fraction(0)) * 2,
                     sum((m.hi for m in mags), Fraction(0)) * 2)

    sigma_pow = cr_pow(sigma, GAMMA).enclosure(ratio_bits)
    r1 = Enclosure.exact(mu_sigma) / sigma_pow
    rhs2 = Enclosure.exact(delta) * (Enclosure.exact(1) + fsum)
    r2 = Enclosure.exact(mu_delta) / rhs2
    r3 = Enclosure.exact(Fraction(mu_delta) / delta)
    if mu_delta != 0:
        scale = cr_pow(sigma / delta, GAMMA).enclosure(ratio_bits)
        r4 = Enclosure.exact(mu_sigma) / (scale * mu_delta)
    else:
        r4 = None
    return InequalityReport(n, sigma, delta, mu_sigma, mu_delta, t_range,
                            fsum, r1, r2, r3, r4)
