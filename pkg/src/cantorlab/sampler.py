"""Monte Carlo sampling of the Cantor measure and hit statistics.

A mu-distributed point is an i.i.d. stream of ternary digits uniform on
{0, 2}; truncating after L digits gives a rational x_L with
x_L <= x <= x_L + 3**-L for the infinite extension.  Hit tests against
dist(2**n x - y, Z) < psi(n) are decided exactly on x_L with a truncation
slack of 2**n * 3**-L: a verdict, once reached, can never flip when more
digits arrive.  When the slack straddles the threshold the test reports
"undecided" and the caller deepens the stream.

All randomness comes from counter-based Philox streams, so identical seeds
reproduce identical reports regardless of batching.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .cantor import RationalLike, as_fraction
from .certified import power_enclosure

HIT = "hit"
MISS = "miss"
UNDECIDED = "undecided"

_BATCH_CHUNK = 1 << 14  # fixed: part of the reproducibility contract


def default_depth(n: int, margin: int = 64) -> int:
    """Digits needed so the slack 2**n 3**-L sits ~3**-margin below 1."""
    return (n * 631) // 1000 + 1 + margin


@dataclass(frozen=True)
class MuSample:
    """A truncated mu-sample: ternary digits, each 0 or 2."""

    digits: tuple[int, ...]
    seed: Optional[int] = None

    def __post_init__(self):
        if any(d not in (0, 2) for d in self.digits):
            raise ValueError("digits must be 0 or 2")

    @property
    def depth(self) -> int:
        return len(self.digits)

    def digit_value(self) -> int:
        """The integer a with x_L = a / 3**depth."""
        a = 0
        for d in self.digits:
            a = 3 * a + d
        return a

    def value(self) -> Fraction:
        return Fraction(self.digit_value(), 3 ** self.depth)


def sample_mu(seed: int, depth: int) -> MuSample:
    """Deterministic truncated sample; deeper calls extend shallower ones."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = Generator(Philox(key=seed))
    digits = 2 * rng.integers(0, 2, size=depth)
    return MuSample(tuple(int(d) for d in digits), seed)


def hit_test(sample: MuSample, n: int, y: RationalLike,
             psi_n: RationalLike) -> str:
    """Exact three-way verdict for dist(2**n x - y, Z) < psi_n.

    The truncated distance is computed as an exact rational; the verdict
    accounts for the whole interval of possible extensions, so HIT and
    MISS are certain and UNDECIDED means the threshold is genuinely within
    truncation reach.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    y, psi = as_fraction(y), as_fraction(psi_n)
    if psi < 0:
        raise ValueError("psi must be nonnegative")
    if psi == 0:
        return MISS
    L = sample.depth
    q = 3 ** L
    v = Fraction((1 << n) * sample.digit_value(), q) - y
    frac = v - (v.numerator // v.denominator)
    dist = min(frac, 1 - frac)
    slack = Fraction(1 << n, q)
    if dist + slack < psi:
        return HIT
    if dist - slack >= psi:
        return MISS
    return UNDECIDED


def decide_hit(seed: int, n: int, y: RationalLike, psi_n: RationalLike, *,
               initial_depth: Optional[int] = None,
               max_doublings: int = 16) -> tuple[str, int]:
    """hit_test with depth escalation: double L until decided or capped.

    Returns (verdict, depth used).  A persistent UNDECIDED after the cap
    means the true distance sits exactly on the threshold as far as any
    finite truncation can tell.
    """
    depth = initial_depth or default_depth(n)
    for _ in range(max_doublings + 1):
        verdict = hit_test(sample_mu(seed, depth), n, y, psi_n)
        if verdict != UNDECIDED:
            return verdict, depth
        depth *= 2
    return UNDECIDED, depth // 2


# --------------------------------------------------------------------------
# Approximation functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    """psi(n) = n**-tau, evaluated as a certified rational upper rounding."""

    tau: Fraction
    precision: int = 128

    def __post_init__(self):
        object.__setattr__(self, "tau", as_fraction(self.tau))

    def psi(self, n: int) -> Fraction:
        return power_enclosure(n, -self.tau, self.precision).hi


@dataclass(frozen=True)
class PsiTable:
    """Explicit nonnegative values of psi at the n they will be asked for."""

    values: tuple[tuple[int, Fraction], ...]

    @staticmethod
    def of(mapping: dict[int, RationalLike]) -> "PsiTable":
        vals = tuple(sorted((int(n), as_fraction(v)) for n, v in mapping.items()))
        if any(v < 0 for _, v in vals):
            raise ValueError("psi values must be nonnegative")
        return PsiTable(vals)

    def psi(self, n: int) -> Fraction:
        for m, v in self.values:
            if m == n:
                return v
        raise ValueError(f"psi table has no value at n={n}")


ApproxFunction = Union[PowerLaw, PsiTable]


# --------------------------------------------------------------------------
# Batch survival statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PerIndexStats:
    n: int
    psi: Fraction
    hits: int
    undecided: int


@dataclass(frozen=True)
class SurvivalReport:
    """Hit frequencies per n plus the share of samples hit at least once.

    The any-hit fraction over a finite n-window is a finite-horizon proxy
    for membership in the limiting approximable set; it is reported as
    such, not as an estimate of the limit object.  Undecided tests (the
    truncation slack straddles the threshold; probability ~3**-margin) are
    tallied separately and never counted as hits.
    """

    n_lo: int
    n_hi: int
    samples: int
    seed: int
    y: Fraction
    depth: int
    per_n: tuple[PerIndexStats, ...]
    any_hit: int

    @property
    def any_hit_fraction(self) -> Fraction:
        return Fraction(self.any_hit, self.samples)

    def frequency(self, n: int) -> Fraction:
        for row in self.per_n:
            if row.n == n:
                return Fraction(row.hits, self.samples)
        raise ValueError(f"n={n} not in report")


def _digit_block_tables(n_bytes: int) -> list[list[int]]:
    """tables[i][byte] = contribution of byte i's bits as ternary digits."""
    tables = []
    for i in range(n_bytes):
        base = [3 ** (8 * i + j) * 2 for j in range(8)]
        tab = []
        for byte in range(256):
            v, b = 0, byte
            j = 0
            while b:
                if b & 1:
                    v += base[j]
                b >>= 1
                j += 1
            tab.append(v)
        tables.append(tab)
    return tables


def survival_curve(psi: ApproxFunction, n_range: tuple[int, int],
                   samples: int, seed: int, y: RationalLike = 0, *,
                   depth_margin: int = 64) -> SurvivalReport:
    """Empirical per-n hit frequencies and the any-hit fraction.

    One digit stream per sample is shared across the whole n-window; the
    distance at n+1 follows from the distance at n by one doubling mod the
    common denominator, so the per-sample cost is linear in the window.
    Undecided verdicts are not escalated here (they would need fresh
    randomness); they are counted and reported.
    """
    n_lo, n_hi = n_range
    if not 1 <= n_lo <= n_hi:
        raise ValueError("need 1 <= n_lo <= n_hi")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    y = as_fraction(y)
    y -= y.numerator // y.denominator  # offset matters only mod 1

    depth = default_depth(n_hi, depth_margin)
    depth = ((depth + 7) // 8) * 8
    n_bytes = depth // 8
    tables = _digit_block_tables(n_bytes)

    Q = 3 ** depth
    yp, yq = y.numerator, y.denominator
    W = Q * yq
    step_add = (yp * Q) % W            # m_{n+1} = (2 m_n + yp*Q) mod W
    c0 = ((1 << n_lo) * yq) % W
    r0 = (-yp * Q) % W

    ns = list(range(n_lo, n_hi + 1))
    psis = [as_fraction(psi.psi(n)) for n in ns]
    # integer comparison data: dist = d/W, slack_n = 2**n yq / W
    slack = [((1 << n) * yq) for n in ns]
    thr_num = [p.numerator * W for p in psis]     # psi * W, scaled by psi_q
    thr_den = [p.denominator for p in psis]

    hits = [0] * len(ns)
    undecided = [0] * len(ns)
    any_hit = 0

    ss = SeedSequence(seed)
    n_chunks = (samples + _BATCH_CHUNK - 1) // _BATCH_CHUNK
    children = ss.spawn(n_chunks)
    done = 0
    for child in children:
        m_chunk = min(_BATCH_CHUNK, samples - done)
        rng = Generator(Philox(child))
        raw = rng.integers(0, 256, size=(m_chunk, n_bytes), dtype=np.uint8)
        for row in raw:
            a = 0
            for i in range(n_bytes):
                a += tables[i][row[i]]
            m = (c0 * a + r0) % W
            sample_hit = False
            for idx in range(len(ns)):
                d = m if 2 * m <= W else W - m
                s, tn, td = slack[idx], thr_num[idx], thr_den[idx]
                if (d + s) * td < tn:
                    hits[idx] += 1
                    sample_hit = True
                elif (d - s) * td < tn:
                    undecided[idx] += 1
                m = (2 * m + step_add) % W
            if sample_hit:
                any_hit += 1
        done += m_chunk

    per_n = tuple(PerIndexStats(n, p, h, u)
                  for n, p, h, u in zip(ns, psis, hits, undecided))
    return SurvivalReport(n_lo, n_hi, samples, seed, y, depth, per_n, any_hit)
