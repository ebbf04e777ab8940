"""Acceptance gate: the numbered guarantees this package ships under.

Each test prints one ``[criterion N]`` PASS/FAIL line so a full run reads
as a checklist.  The tolerances are contractual: loosening one is a
behavior change, not a test fix.  Oracles are recomputed here from
independent routes (direct propagation, root finding, numerical
integration) rather than imported from the modules under test.
"""

import math
import time
from dataclasses import replace

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from qnoise import (
    AdcConfig,
    BalancedDetectorConfig,
    ControllerConfig,
    InterferometerConfig,
    LocalOscillator,
    PhotodiodeParams,
    QuadratureSample,
    SamplerConfig,
    analytic_moments,
    balance_phase,
    clearance,
    closed_form_transfer,
    cmrr,
    coefficients_from_transfer,
    compose_transfer,
    difference_current,
    general_coefficients,
    lossy_coefficients,
    min_entropy,
    propagate,
    run_balance,
    run_power_scan,
    run_psd,
    run_qrng,
    shot_noise_psd,
)
from qnoise.cli import DEFAULT_CONFIG, _build_detector

# cos(2*alpha2) = -0.02: the slightly unbalanced second coupler used for
# the asymmetric-coefficient and balance-offset checks
ASYMMETRIC_ALPHA2 = math.asin(math.sqrt(0.51))


def _announce(capsys, number: int, label: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        status = "PASS" if ok else "FAIL"
        print(f"\n[criterion {number}] {label}: {status} ({detail})")


def test_criterion_1_transfer_matrix_suite(capsys):
    rng = np.random.default_rng(20260815)
    eye = np.eye(2)
    worst_closed = 0.0
    worst_unitary = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        config = InterferometerConfig(
            alpha1=rng.uniform(0.0, math.pi),
            alpha2=rng.uniform(0.0, math.pi),
            phi=rng.uniform(-math.pi, math.pi),
        )
        product = compose_transfer(config)
        closed = closed_form_transfer(config.alpha1, config.alpha2, config.phi)
        worst_closed = max(worst_closed, float(np.abs(closed - product).max()))
        gram = product.conj().T @ product
        worst_unitary = max(worst_unitary, float(np.abs(gram - eye).max()))
    elapsed = time.perf_counter() - t0

    ok = worst_closed <= 1e-12 and worst_unitary <= 1e-12 and elapsed < 1.0
    _announce(
        capsys, 1, "closed-form transfer equals the product, unitary", ok,
        f"max closed-form dev {worst_closed:.2e}, max unitarity dev "
        f"{worst_unitary:.2e}, {elapsed:.2f}s for 1000 tuples",
    )
    assert worst_closed <= 1e-12
    assert worst_unitary <= 1e-12
    assert elapsed < 1.0


def test_criterion_2_difference_current_oracle(capsys):
    rng = np.random.default_rng(404)
    worst = 0.0
    t0 = time.perf_counter()
    for k in range(1000):
        # rotate through the three coefficient routes so every closed
        # form meets the propagation oracle, losses included
        if k % 3 == 0:
            config = InterferometerConfig(
                rng.uniform(0.0, math.pi), rng.uniform(0.0, math.pi),
                rng.uniform(-math.pi, math.pi),
            )
            coeffs = general_coefficients(config.alpha1, config.alpha2, config.phi)
        elif k % 3 == 1:
            config = InterferometerConfig(
                math.pi / 4.0, rng.uniform(0.0, math.pi),
                rng.uniform(-math.pi, math.pi),
                eta1=rng.uniform(0.2, 1.0), eta2=rng.uniform(0.2, 1.0),
            )
            coeffs = lossy_coefficients(
                config.alpha2, config.phi, config.eta1, config.eta2
            )
        else:
            config = InterferometerConfig(
                rng.uniform(0.0, math.pi), rng.uniform(0.0, math.pi),
                rng.uniform(-math.pi, math.pi),
                eta1=rng.uniform(0.2, 1.0), eta2=rng.uniform(0.2, 1.0),
            )
            coeffs = coefficients_from_transfer(compose_transfer(config))

        lo = LocalOscillator(rng.normal(scale=3.0), rng.normal(scale=3.0))
        sample = QuadratureSample(rng.normal(), rng.normal())
        decomposed = difference_current(coeffs, lo, sample)

        u = compose_transfer(config)
        out1, out2 = propagate(
            u, complex(lo.eps_real, lo.eps_imag), complex(sample.x, sample.y)
        )
        direct = abs(out1) ** 2 - abs(out2) ** 2
        worst = max(worst, abs(float(decomposed) - direct))
    elapsed = time.perf_counter() - t0

    ok = worst <= 1e-10 and elapsed < 1.0
    _announce(
        capsys, 2, "coefficient decomposition equals direct propagation", ok,
        f"max dev {worst:.2e} over 1000 lossy tuples, {elapsed:.2f}s",
    )
    assert worst <= 1e-10
    assert elapsed < 1.0


def test_criterion_3_asymmetric_constants_and_balance_offset(capsys):
    coeffs = general_coefficients(math.pi / 4.0, ASYMMETRIC_ALPHA2, math.pi / 2.0)
    quadrature_mag = abs(coeffs.c_y) / 2.0  # expect 2*sqrt(0.49*0.51)
    dc_mag = abs(coeffs.c_x) / 2.0          # expect 0.51 - 0.49
    quad_dev = abs(quadrature_mag - 0.99980)
    dc_dev = abs(dc_mag - 0.02000)

    eta1, eta2 = 0.9, 0.85
    offset = abs(balance_phase(ASYMMETRIC_ALPHA2, eta1, eta2) - math.pi / 2.0)

    # independent root of the intensity coefficient, straight from the
    # transfer matrix; no shared algebra with balance_phase
    def intensity_coefficient(phi: float) -> float:
        u = compose_transfer(
            InterferometerConfig(math.pi / 4.0, ASYMMETRIC_ALPHA2, phi, eta1, eta2)
        )
        return abs(u[0, 0]) ** 2 - abs(u[1, 0]) ** 2

    root = brentq(
        intensity_coefficient, math.pi / 2.0 - 0.1, math.pi / 2.0 + 0.1, xtol=1e-15
    )
    oracle_offset = abs(root - math.pi / 2.0)

    oracle_dev = abs(offset - oracle_offset)
    quoted_dev = abs(offset - 3.64e-4 * math.pi)
    # one significant figure against 3e-4*pi: agree within half a decade step
    sig_fig_ok = abs(offset / math.pi - 3e-4) < 1e-4

    ok = (
        quad_dev <= 5e-5 and dc_dev <= 5e-5
        and oracle_dev <= 1e-6 * math.pi and quoted_dev <= 1e-6 * math.pi
        and sig_fig_ok
    )
    _announce(
        capsys, 3, "asymmetric coefficients and balance-phase offset", ok,
        f"|c_y|/2={quadrature_mag:.6f}, |c_x|/2={dc_mag:.6f}, "
        f"offset={offset / math.pi:.6e} pi vs oracle {oracle_offset / math.pi:.6e} pi",
    )
    assert quad_dev <= 5e-5
    assert dc_dev <= 5e-5
    assert oracle_dev <= 1e-6 * math.pi
    assert quoted_dev <= 1e-6 * math.pi
    assert sig_fig_ok


def test_criterion_4_controller_convergence(capsys):
    interferometer = InterferometerConfig(
        math.pi / 4.0, ASYMMETRIC_ALPHA2, math.pi / 2.0, eta1=0.9, eta2=0.85
    )
    lo = LocalOscillator(100.0)  # intensity 1e4
    t0 = time.perf_counter()

    quiet = SamplerConfig(seed=11, sample_rate=1e9, n_samples=1, sigma2_vac=0.0)
    exact = run_balance(
        interferometer, lo, quiet,
        ControllerConfig(dc_window=1, tolerance=1e-6, max_iterations=200),
    )
    noise_free_ok = (
        exact.state.converged
        and exact.state.iteration <= 200
        and exact.phase_error_rad <= 5e-5 * math.pi
    )

    fringe = lo.intensity * 0.9 * 0.85 * abs(math.sin(2.0 * ASYMMETRIC_ALPHA2))
    failures = 0
    for seed in range(100):
        sampler = SamplerConfig(seed=seed, sample_rate=1e9, n_samples=10_000)
        result = run_balance(
            interferometer, lo, sampler,
            ControllerConfig(dc_window=10_000, tolerance=1e-3, max_iterations=200),
        )
        coeffs = lossy_coefficients(ASYMMETRIC_ALPHA2, result.state.phase, 0.9, 0.85)
        mean, _ = analytic_moments(coeffs, lo, 0.25)
        if not (result.state.converged and abs(mean) / fringe < 1e-3):
            failures += 1
    elapsed = time.perf_counter() - t0

    ok = noise_free_ok and failures <= 1 and elapsed < 30.0
    _announce(
        capsys, 4, "controller locks noise-free and under shot noise", ok,
        f"noise-free error {exact.phase_error_rad / math.pi:.2e} pi in "
        f"{exact.state.iteration} steps; {100 - failures}/100 noisy runs "
        f"below 0.1% residual, {elapsed:.1f}s",
    )
    assert noise_free_ok
    assert failures <= 1
    assert elapsed < 30.0


def test_criterion_5_shot_noise_linearity(capsys):
    interferometer = InterferometerConfig(
        math.pi / 4.0, ASYMMETRIC_ALPHA2, math.pi / 2.0, eta1=0.9, eta2=0.85
    )
    intensities = np.linspace(4e8, 4e9, 10)
    base = SamplerConfig(seed=71, sample_rate=5e9, n_samples=2**17)
    t0 = time.perf_counter()
    off = run_power_scan(interferometer, base, intensities)
    on = run_power_scan(
        interferometer,
        replace(base, rin_dbhz=-140.0, rin_bandwidth=1e9),
        intensities,
    )
    elapsed = time.perf_counter() - t0

    ok = (
        not off.rin_enabled and off.r_squared_linear > 0.999
        and on.rin_enabled and on.quad_coef > 0.0 and on.quad_t_stat > 3.0
        and elapsed < 60.0
    )
    _announce(
        capsys, 5, "noise power linear in LO power, quadratic with RIN", ok,
        f"R^2 through origin {off.r_squared_linear:.6f}; with RIN quad "
        f"coef {on.quad_coef:.3e} at t={on.quad_t_stat:.1f}, {elapsed:.1f}s",
    )
    assert not off.rin_enabled
    assert off.r_squared_linear > 0.999
    assert on.rin_enabled
    assert on.quad_coef > 0.0
    assert on.quad_t_stat > 3.0
    assert elapsed < 60.0


def test_criterion_6_detected_psd_matches_shot_model(capsys):
    diode = PhotodiodeParams()
    det = BalancedDetectorConfig(diode, diode, electronic_noise_dbm_hz=None)
    interferometer = InterferometerConfig(math.pi / 4.0, math.pi / 4.0, math.pi / 2.0)
    # record sized for 256 non-overlapping segments of 4096
    sampler = SamplerConfig(seed=617, sample_rate=1e10, n_samples=256 * 4096)
    result, _ = run_psd(
        interferometer, LocalOscillator(1000.0), sampler, detector=det, p_opt=0.05
    )
    detected_w = result.detected * det.load_resistance
    ratio = detected_w[1:-1] / result.shot_model[1:-1]
    rms = float(np.sqrt(np.mean((ratio - 1.0) ** 2)))

    n0 = float(shot_noise_psd(0.0, 1e-3, BalancedDetectorConfig(diode, diode)))
    n0_dev = abs(n0 - 1.25e-20) / 1.25e-20

    ok = rms < 0.05 and n0_dev < 0.01 and result.n_averages >= 256
    _announce(
        capsys, 6, "detected spectrum sits on the filtered shot density", ok,
        f"rms deviation {100 * rms:.2f}% over {result.n_averages} averages; "
        f"N(0)={n0:.6e} W/Hz at 1 mW",
    )
    assert result.n_averages >= 256
    assert rms < 0.05
    assert n0_dev < 0.01


def test_criterion_7_clearance_band(capsys):
    t0 = time.perf_counter()
    det = _build_detector(DEFAULT_CONFIG)
    p_opt = DEFAULT_CONFIG["detector"]["p_opt_w"]
    freqs = np.linspace(0.0, 6e9, 6001)
    report = clearance(p_opt, det, freqs, threshold_db=12.0)
    at_4ghz = float(np.interp(4e9, freqs, report.clearance_db))
    elapsed = time.perf_counter() - t0

    ok = report.band_limit_hz >= 4e9 and at_4ghz >= 12.0 and elapsed < 60.0
    _announce(
        capsys, 7, "default config clears the floor by 12 dB past 4 GHz", ok,
        f"{at_4ghz:.2f} dB at 4 GHz, threshold held to "
        f"{report.band_limit_hz / 1e9:.2f} GHz, {elapsed:.1f}s",
    )
    assert report.band_limit_hz >= 4e9
    assert at_4ghz >= 12.0
    assert elapsed < 60.0


def test_criterion_8_common_mode_rejection(capsys):
    det = BalancedDetectorConfig(PhotodiodeParams(), PhotodiodeParams())
    freqs = np.linspace(0.0, 5e9, 2001)
    curve = cmrr(freqs, det)
    in_band_min = float(curve[freqs <= 3e9].min())
    non_increasing = bool(np.all(np.diff(curve) <= 1e-9))

    ok = in_band_min >= 15.0 and non_increasing
    _announce(
        capsys, 8, "common-mode rejection holds 15 dB to 3 GHz, monotone", ok,
        f"min {in_band_min:.2f} dB below 3 GHz, non-increasing={non_increasing}",
    )
    assert in_band_min >= 15.0
    assert non_increasing


def test_criterion_9_qrng_entropy_and_battery(capsys):
    t0 = time.perf_counter()
    adc = AdcConfig(bits=8, full_scale_sigma=4.0)
    golden = min_entropy(adc, sigma=1.0)

    # integration oracle: per-cell Gaussian masses with clamped tails
    edges = np.linspace(-4.0, 4.0, 2**adc.bits + 1)
    masses = [
        quad(norm.pdf, float(a), float(b))[0]
        for a, b in zip(edges[:-1], edges[1:])
    ]
    masses[0] += quad(norm.pdf, -np.inf, float(edges[0]))[0]
    masses[-1] += quad(norm.pdf, float(edges[-1]), np.inf)[0]
    oracle = -math.log2(max(masses))
    entropy_dev = abs(golden - oracle)

    interferometer = InterferometerConfig(math.pi / 4.0, math.pi / 4.0, math.pi / 2.0)
    lo = LocalOscillator(1000.0)
    sampler = SamplerConfig(seed=5150, sample_rate=1e10, n_samples=2**15)
    first = run_qrng(interferometer, lo, sampler, adc, extractor_seed=99)
    second = run_qrng(interferometer, lo, sampler, adc, extractor_seed=99)
    reseeded = run_qrng(
        interferometer, lo, replace(sampler, seed=5151), adc, extractor_seed=99
    )
    deterministic = (
        first.stream.n_bits == second.stream.n_bits
        and np.array_equal(first.stream.bits, second.stream.bits)
        and not np.array_equal(first.stream.bits, reseeded.stream.bits)
    )

    passes = 0
    for seed in range(100):
        result = run_qrng(
            interferometer, lo, replace(sampler, seed=seed), adc,
            extractor_seed=seed + 7,
        )
        if result.report is not None and result.report.passed:
            passes += 1
    elapsed = time.perf_counter() - t0

    ok = entropy_dev <= 1e-6 and deterministic and passes >= 95 and elapsed < 60.0
    _announce(
        capsys, 9, "min-entropy golden value, determinism, bit battery", ok,
        f"H_min={golden:.9f} bits (oracle dev {entropy_dev:.1e}), "
        f"deterministic={deterministic}, battery {passes}/100, {elapsed:.1f}s",
    )
    assert entropy_dev <= 1e-6
    assert deterministic
    assert passes >= 95
    assert elapsed < 60.0
