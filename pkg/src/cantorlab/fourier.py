"""Certified Fourier coefficient magnitudes of the Cantor measure.

Writing a mu-distributed point as sum(d_j 3**-j) with independent digits
d_j uniform on {0, 2}, the characteristic function factorizes:

    mu_hat(k) = E e(-k X) = prod_j E e(-k d_j 3**-j)
              = prod_j e(-k 3**-j) cos(2 pi k / 3**j),

so |mu_hat(k)| = prod_{j>=1} |cos(2 pi k / 3**j)|.  Each factor only needs
k mod 3**j, which for frequencies t * 2**n comes from modular
exponentiation -- no factor ever touches the full product t * 2**n.

The product is truncated at depth J with a certified tail: for |z| <= 1 we
have cos z >= exp(-z*z) (since cos z >= 1 - z*z/2 >= exp(-z*z) there), so

    prod_{j>J} |cos(2 pi k 3**-j)|  in  [exp(-(2 pi k / 3**J)**2 / 8), 1],

the sum of squared angles past J being a geometric series with ratio 1/9.
All floating work happens in interval arithmetic, so the returned bracket
is rigorous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from .certified import (CReal, Enclosure, PrecisionCapExceeded, _fresh_context,
                        as_creal, cr_pow, certified_floor, iv_bounds,
                        rational_pow)

DEFAULT_FOURIER_PRECISION = 64


@dataclass(frozen=True)
class FourierQuery:
    """Frequency t * 2**n kept in factored form."""

    t: int
    n: int
    precision: int = DEFAULT_FOURIER_PRECISION

    def __post_init__(self):
        if self.t == 0:
            raise ValueError("factored frequency needs t != 0")
        if self.n < 0:
            raise ValueError("exponent n must be nonnegative")


@dataclass(frozen=True)
class FourierMagnitude:
    """Certified bracket around |mu_hat(k)|."""

    lo: Fraction
    hi: Fraction

    @property
    def value(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def error_bound(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def enclosure(self) -> Enclosure:
        return Enclosure(self.lo, self.hi)

    def __float__(self) -> float:
        return float(self.value)


def _log3_ceil(k: int) -> int:
    """Smallest j with 3**j >= k (k >= 1)."""
    j, p = 0, 1
    while p < k:
        j += 1
        p *= 3
    return j


def _product_magnitude(residue: Callable[[int], int], log3_k: int,
                       precision: int) -> FourierMagnitude:
    """Shared core: certified prod_j |cos(2 pi (k mod 3**j) / 3**j)|.

    ``residue(pow3)`` must return the frequency modulo pow3; ``log3_k``
    bounds log_3 of the absolute frequency from above.
    """
    # depth so the tail bound (2 pi k)^2 9^-J / 8 is far below 2^-precision
    depth = log3_k + (precision * 631) // 1000 + 6
    work_prec = precision + 32
    target_width = Fraction(1, 1 << precision)
    while True:
        ctx = _fresh_context(work_prec)
        two_pi = 2 * ctx.pi
        prod = ctx.mpf(1)
        pow3 = 1
        for _ in range(depth):
            pow3 *= 3
            r = residue(pow3)
            if r:
                prod *= abs(ctx.cos(two_pi * r / pow3))
        # tail: angles past depth are below 2 pi 3**(log3_k - depth) <= 1
        tail_sq = (two_pi * ctx.mpf(3) ** (log3_k - depth)) ** 2 / 8
        tail_lo = ctx.exp(-tail_sq)
        plo, phi = iv_bounds(prod)
        tlo, _ = iv_bounds(tail_lo)
        lo = max(Fraction(0), plo * tlo)
        hi = min(Fraction(1), phi)
        if hi - lo <= target_width:
            return FourierMagnitude(lo, hi)
        work_prec *= 2
        if work_prec > 64 * precision + 4096:
            raise PrecisionCapExceeded(
                f"fourier product failed to reach 2^-{precision} width")


def mu_hat_magnitude(k: int, precision: int = DEFAULT_FOURIER_PRECISION
                     ) -> FourierMagnitude:
    """|mu_hat(k)| with certified absolute error at most 2**-precision."""
    k = abs(k)
    if k == 0:
        return FourierMagnitude(Fraction(1), Fraction(1))
    return _product_magnitude(lambda pow3: k % pow3, _log3_ceil(k), precision)


def mu_hat_scaled(query_or_t: Union[FourierQuery, int], n: Optional[int] = None,
                  precision: Optional[int] = None) -> FourierMagnitude:
    """|mu_hat(t * 2**n)| via per-factor modular exponentiation.

    The factored frequency is never materialized: factor j uses
    t * (2**n mod 3**j) mod 3**j, so the work per factor is O(j) digits and
    the truncation depth grows only linearly in n.
    """
    if isinstance(query_or_t, FourierQuery):
        q = query_or_t
        t, n, prec = q.t, q.n, q.precision if precision is None else precision
    else:
        if n is None:
            raise TypeError("mu_hat_scaled(t, n, ...) needs the exponent n")
        t, prec = query_or_t, precision or DEFAULT_FOURIER_PRECISION
    t = abs(t)
    if t == 0:
        raise ValueError("factored frequency needs t != 0")
    # log3(t * 2**n) <= log3(t) + ceil(n log 2/log 3)
    log3_k = _log3_ceil(t) + (n * 631) // 1000 + 1
    return _product_magnitude(
        lambda pow3: (t * pow(2, n, pow3)) % pow3, log3_k, prec)


# --------------------------------------------------------------------------
# Good / bad frequency partition
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GoodBadPartition:
    """Split of the block [N, 2N] by the Fourier maximum criterion.

    ``good`` holds the n with max_{1<=|t|<=t_range} |mu_hat(t 2**n)| at or
    below threshold; ``bad`` the rest.  Indices whose comparison could not
    be settled below the precision cap appear in ``boundary`` and are
    conservatively also members of ``bad``.
    """

    N: int
    good: tuple[int, ...]
    bad: tuple[int, ...]
    boundary: tuple[int, ...]
    threshold: Enclosure
    t_range: int
    max_magnitude: dict[int, Enclosure] = field(default_factory=dict, repr=False)

    @property
    def bad_count(self) -> int:
        return len(self.bad)


def floor_two_over_delta(m: int, alpha: Fraction,
                         precision: int = DEFAULT_FOURIER_PRECISION,
                         prec_cap: int = 4096) -> int:
    """floor(2 / m**-alpha) = floor(2 * m**alpha), certified."""
    exact = rational_pow(Fraction(m), alpha)
    if exact is not None:
        v = 2 * exact
        return v.numerator // v.denominator
    return certified_floor(2 * cr_pow(m, alpha), start=precision, cap=prec_cap)


def coarse_t_range(N: int, alpha: Fraction,
                   precision: int = DEFAULT_FOURIER_PRECISION,
                   prec_cap: int = 4096) -> int:
    """floor(2 / delta_{2N}): the t window used to classify the block at N."""
    return floor_two_over_delta(2 * N, alpha, precision, prec_cap)


def classify_index(n: int, C: Fraction, beta1: Fraction, block_start: int,
                   t_range: int, precision: int = DEFAULT_FOURIER_PRECISION,
                   prec_cap: int = 4096) -> tuple[int, str, Enclosure]:
    """Verdict for one n: ("good" | "bad" | "boundary", max-magnitude bracket).

    The Fourier maximum over t and the threshold C * block_start**-beta1
    are both certified brackets; on overlap the working precision doubles
    until they separate or the cap flags the index as boundary.
    """
    threshold = as_creal(C) * cr_pow(block_start, -as_creal(beta1))
    prec = precision
    while True:
        thr_lo, thr_hi = threshold.bounds(prec)
        mags = [mu_hat_scaled(t, n, prec) for t in range(1, t_range + 1)]
        mag_lo = max(m.lo for m in mags)
        mag_hi = max(m.hi for m in mags)
        if mag_hi <= thr_lo:
            return n, "good", Enclosure(mag_lo, mag_hi)
        if mag_lo > thr_hi:
            return n, "bad", Enclosure(mag_lo, mag_hi)
        prec *= 2
        if prec > prec_cap:
            return n, "boundary", Enclosure(mag_lo, mag_hi)


def assemble_partition(N: int, t_range: int, threshold: Enclosure,
                       verdicts) -> GoodBadPartition:
    """Merge per-index verdicts (any order) into a partition, sorted by n."""
    good, bad, boundary = [], [], []
    max_mag: dict[int, Enclosure] = {}
    for n, verdict, mag in sorted(verdicts):
        max_mag[n] = mag
        if verdict == "good":
            good.append(n)
        else:
            bad.append(n)       # boundary is conservatively bad
            if verdict == "boundary":
                boundary.append(n)
    return GoodBadPartition(N, tuple(good), tuple(bad), tuple(boundary),
                            threshold, t_range, max_mag)


def classify_good_bad(N: int, params, precision: int = DEFAULT_FOURIER_PRECISION,
                      prec_cap: int = 4096) -> GoodBadPartition:
    """Classify every n in [N, 2N] against the threshold C * N**-beta1.

    Magnitudes and the threshold are compared through certified brackets;
    comparisons the precision cap cannot settle are flagged boundary and
    counted bad (conservative: a doubtful n never certifies as good).
    Only positive t are evaluated since |mu_hat(-k)| = |mu_hat(k)|.
    """
    if N < 1:
        raise ValueError("block start N must be >= 1")
    t_range = coarse_t_range(N, params.alpha, precision, prec_cap)
    verdicts = [classify_index(n, params.C, params.beta1, N, t_range,
                               precision, prec_cap)
                for n in range(N, 2 * N + 1)]
    threshold = as_creal(params.C) * cr_pow(N, -as_creal(params.beta1))
    thr = Enclosure(*threshold.bounds(precision))
    return assemble_partition(N, t_range, thr, verdicts)
