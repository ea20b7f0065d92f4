import time
from fractions import Fraction

import numpy as np
import pytest

from cantorlab.experiments import ExperimentParams
from cantorlab.fourier import (FourierQuery, classify_good_bad,
                               coarse_t_range, floor_two_over_delta,
                               mu_hat_magnitude, mu_hat_scaled)


def discrete_mu_midpoints(level: int) -> np.ndarray:
    """Midpoints of the 2**level construction intervals (uniform weights)."""
    vals = np.zeros(1)
    for j in range(level):
        vals = np.concatenate([vals, vals + 2.0 * 3.0 ** j])
    return (vals + 0.5) / 3.0 ** level


def quadrature_magnitude(k: int, midpoints: np.ndarray) -> float:
    """Independent oracle: midpoint rule against the discrete approximation."""
    return abs(np.exp(-2j * np.pi * k * midpoints).mean())


@pytest.fixture(scope="module")
def midpoints_16():
    return discrete_mu_midpoints(16)


def test_zero_frequency_is_one():
    m = mu_hat_magnitude(0)
    assert m.lo == m.hi == 1


def test_value_at_one_against_quadrature(midpoints_16):
    m = mu_hat_magnitude(1)
    est = quadrature_magnitude(1, midpoints_16)
    assert abs(float(m) - est) < 1e-3
    assert abs(float(m) - 0.3714) < 1e-3


def test_quadrature_agreement_small_k(midpoints_16):
    # discretization error of the level-16 midpoint rule is ~pi*k*3^-16
    for k in range(1, 33):
        est = quadrature_magnitude(k, midpoints_16)
        got = mu_hat_magnitude(k, 64)
        assert abs(float(got) - est) < 1e-4, k


def test_threefold_invariance():
    for k in (1, 17, 123, 4567):
        a, b = mu_hat_magnitude(k, 80), mu_hat_magnitude(3 * k, 80)
        assert abs(a.value - b.value) <= a.error_bound + b.error_bound + \
            Fraction(1, 10 ** 13)


def test_negative_frequency_symmetry():
    a, b = mu_hat_magnitude(-29), mu_hat_magnitude(29)
    assert a.lo == b.lo and a.hi == b.hi


def test_factored_path_matches_plain():
    for t in (1, 2, 3, 5, 8):
        for n in (0, 1, 7, 13, 20):
            a = mu_hat_scaled(t, n, 64)
            b = mu_hat_magnitude(t * 2 ** n, 64)
            # brackets of the same number must overlap, and the values
            # agree within the combined certified errors
            assert not (a.hi < b.lo or b.hi < a.lo), (t, n)
            assert abs(a.value - b.value) <= a.error_bound + b.error_bound


def test_factored_path_large_exponent_fast():
    t0 = time.time()
    m = mu_hat_scaled(1, 200, 64)
    assert time.time() - t0 < 1.0
    assert 0 <= m.lo <= m.hi <= 1
    assert m.error_bound <= Fraction(1, 2 ** 64)


def test_query_object_and_validation():
    q = FourierQuery(t=3, n=5, precision=64)
    assert mu_hat_scaled(q).value == mu_hat_scaled(3, 5, 64).value
    with pytest.raises(ValueError):
        FourierQuery(t=0, n=1)
    with pytest.raises(ValueError):
        mu_hat_scaled(0, 4)


def test_determinism():
    a = mu_hat_magnitude(987654321, 96)
    b = mu_hat_magnitude(987654321, 96)
    assert (a.lo, a.hi) == (b.lo, b.hi)


def test_precision_controls_width():
    wide = mu_hat_magnitude(7, 40).error_bound
    tight = mu_hat_magnitude(7, 120).error_bound
    assert tight <= Fraction(1, 2 ** 120) / 2
    assert tight < wide


# --------------------------------------------------------------------------
# Partition
# --------------------------------------------------------------------------

def test_t_range_certified():
    # 2 * 32**(1/20) = 2.378..; 2 * 1**alpha = 2
    assert coarse_t_range(16, Fraction(1, 20)) == 2
    assert floor_two_over_delta(1, Fraction(1, 20)) == 2
    assert floor_two_over_delta(2 ** 20, Fraction(1, 20)) == 4


def test_large_C_gives_empty_bad():
    # C >= N**beta1 makes the threshold at least 1 >= any magnitude
    p = ExperimentParams(tau=Fraction(2), C=Fraction(10))
    part = classify_good_bad(16, p, 64)
    assert part.bad == () and part.boundary == ()
    assert part.good == tuple(range(16, 33))


def test_partition_pinned_at_16():
    p = ExperimentParams(tau=Fraction(2))  # C = 1
    part = classify_good_bad(16, p, 64)
    assert part.t_range == 2
    # calibration: every n in [16, 32] is good at C=1 (max |mu_hat| <= 5e-3
    # versus threshold 16**-0.078 = 0.805..)
    assert part.good == tuple(range(16, 33))
    assert part.bad == () and part.boundary == ()
    assert all(part.max_magnitude[n].hi < Fraction(1, 100)
               for n in range(16, 33))
    assert Fraction("0.8055") < part.threshold.midpoint < Fraction("0.8056")


def test_partition_conservative_on_uninformative_brackets(monkeypatch):
    # fault injection: a maximally wide (still valid) magnitude bracket can
    # never separate from the threshold, so every index must end up flagged
    # boundary and classified bad
    import cantorlab.fourier as fourier_mod
    from cantorlab.fourier import FourierMagnitude

    monkeypatch.setattr(
        fourier_mod, "mu_hat_scaled",
        lambda t, n, prec=64: FourierMagnitude(Fraction(0), Fraction(1)))
    p = ExperimentParams(tau=Fraction(2))
    part = fourier_mod.classify_good_bad(4, p, precision=64, prec_cap=256)
    assert part.good == ()
    assert set(part.boundary) == set(range(4, 9))
    assert set(part.bad) == set(range(4, 9))
