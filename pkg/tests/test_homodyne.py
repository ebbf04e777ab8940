import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qnoise.homodyne import (
    DegenerateConfigError,
    LocalOscillator,
    QuadratureSample,
    UnbalanceableError,
    analytic_moments,
    balance_phase,
    coefficients_from_transfer,
    difference_current,
    general_coefficients,
    lossy_coefficients,
)
from qnoise.interferometer import InterferometerConfig, compose_transfer, propagate


def _direct_current(u, eps, x, y):
    # oracle route: propagate the two fields and subtract the port powers
    out1, out2 = propagate(u, eps, complex(x, y))
    return float(abs(out1) ** 2 - abs(out2) ** 2)


def test_decomposition_matches_direct_propagation_with_losses():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(500):
        a1, a2, phi = rng.uniform(-math.pi, math.pi, 3)
        eta1, eta2 = rng.uniform(0.1, 1.0, 2)
        u = compose_transfer(InterferometerConfig(a1, a2, phi, eta1, eta2))
        coeffs = coefficients_from_transfer(u)
        lo = LocalOscillator(rng.uniform(-8, 8), rng.uniform(-8, 8))
        sample = QuadratureSample(rng.normal(0, 2), rng.normal(0, 2))
        via_coeffs = difference_current(coeffs, lo, sample)
        direct = _direct_current(u, complex(lo.eps_real, lo.eps_imag), sample.x, sample.y)
        worst = max(worst, abs(via_coeffs - direct))
    assert worst < 1e-10


def test_general_coefficients_match_transfer_route():
    rng = np.random.default_rng(103)
    for _ in range(300):
        a1, a2, phi = rng.uniform(-math.pi, math.pi, 3)
        closed = general_coefficients(a1, a2, phi)
        from_u = coefficients_from_transfer(compose_transfer(InterferometerConfig(a1, a2, phi)))
        assert_allclose(
            [closed.c_sum, closed.c_diff, closed.c_x, closed.c_y],
            [from_u.c_sum, from_u.c_diff, from_u.c_x, from_u.c_y],
            atol=1e-12,
        )


def test_lossy_coefficients_match_transfer_route():
    rng = np.random.default_rng(107)
    for _ in range(300):
        a2, phi = rng.uniform(-math.pi, math.pi, 2)
        eta1, eta2 = rng.uniform(0.05, 1.0, 2)
        closed = lossy_coefficients(a2, phi, eta1, eta2)
        u = compose_transfer(InterferometerConfig(math.pi / 4.0, a2, phi, eta1, eta2))
        from_u = coefficients_from_transfer(u)
        assert_allclose(
            [closed.c_sum, closed.c_diff, closed.c_x, closed.c_y],
            [from_u.c_sum, from_u.c_diff, from_u.c_x, from_u.c_y],
            atol=1e-12,
        )


def test_symmetric_setting_reads_one_quadrature():
    for phi in np.linspace(-math.pi, math.pi, 41):
        c = general_coefficients(math.pi / 4.0, math.pi / 4.0, float(phi))
        assert_allclose(c.c_sum, 0.0, atol=1e-15)
        assert_allclose(c.c_diff, math.cos(phi), atol=1e-12)
        assert_allclose(c.c_x, 0.0, atol=1e-12)
        assert_allclose(c.c_y, -2.0 * math.sin(phi), atol=1e-12)


def test_asymmetric_splitter_magnitudes():
    # 49:51 split: fringe amplitude 2*sqrt(0.49*0.51), offset |1 - 2*0.51|
    alpha2 = math.asin(math.sqrt(0.51))
    c = lossy_coefficients(alpha2, math.pi / 2.0, 1.0, 1.0)
    assert_allclose(abs(c.c_y) / 2.0, 2.0 * math.sqrt(0.49 * 0.51), atol=5e-5)
    assert_allclose(abs(c.c_x) / 2.0, 0.02, atol=5e-5)


def test_balance_phase_nulls_intensity_term():
    rng = np.random.default_rng(109)
    checked = 0
    while checked < 200:
        a2 = rng.uniform(0.3, math.pi / 2.0 - 0.3)
        eta1, eta2 = rng.uniform(0.3, 1.0, 2)
        try:
            phi_star = balance_phase(a2, eta1, eta2)
        except UnbalanceableError:
            continue
        c = lossy_coefficients(a2, phi_star, eta1, eta2)
        # mean current at sigma2 = 0 is (c_sum + c_diff) * I
        assert abs(c.c_sum + c.c_diff) < 1e-12
        checked += 1


def test_balance_phase_equal_losses_is_quarter_wave():
    assert_allclose(balance_phase(math.pi / 4.0, 0.7, 0.7), math.pi / 2.0, atol=1e-15)
    # alpha2 = pi/4 kills the offset even for unequal losses
    assert_allclose(balance_phase(math.pi / 4.0, 0.9, 0.6), math.pi / 2.0, atol=1e-15)


def test_balance_phase_failure_modes():
    with pytest.raises(DegenerateConfigError):
        balance_phase(0.0, 0.9, 0.9)
    with pytest.raises(DegenerateConfigError):
        balance_phase(math.pi / 2.0, 0.9, 0.9)
    with pytest.raises(DegenerateConfigError):
        balance_phase(0.4, 0.0, 0.9)
    with pytest.raises(UnbalanceableError):
        balance_phase(0.2, 1.0, 0.2)


def test_analytic_moments_against_monte_carlo():
    rng = np.random.default_rng(113)
    u = compose_transfer(InterferometerConfig(0.7, 0.9, 1.3, 0.9, 0.8))
    coeffs = coefficients_from_transfer(u)
    lo = LocalOscillator(6.0, -2.0)
    sigma2 = 0.25
    mean, var = analytic_moments(coeffs, lo, sigma2)

    n = 2_000_000
    x = rng.normal(0.0, math.sqrt(sigma2), n)
    y = rng.normal(0.0, math.sqrt(sigma2), n)
    out1, out2 = propagate(u, complex(6.0, -2.0), x + 1j * y)
    j = np.abs(out1) ** 2 - np.abs(out2) ** 2
    assert abs(j.mean() - mean) < 5.0 * math.sqrt(var / n)
    assert abs(j.var() - var) < 0.02 * var


def test_analytic_moments_rejects_negative_variance():
    c = general_coefficients(0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        analytic_moments(c, LocalOscillator(1.0), -0.1)


def test_difference_current_accepts_arrays():
    c = general_coefficients(0.6, 0.8, 1.0)
    lo = LocalOscillator(3.0)
    xs = np.array([0.1, -0.4, 0.0])
    ys = np.array([0.2, 0.3, -0.1])
    vec = difference_current(c, lo, QuadratureSample(xs, ys))
    for i in range(3):
        single = difference_current(c, lo, QuadratureSample(float(xs[i]), float(ys[i])))
        assert_allclose(vec[i], single, rtol=1e-14)
