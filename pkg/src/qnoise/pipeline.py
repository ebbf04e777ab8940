"""End-to-end workflows built from the lower-level modules.

Each function here corresponds to one complete measurement procedure:
sweeping the fringe, locking the balance point, taking calibrated noise
spectra, scanning the noise power against oscillator intensity, and
turning a record into random bits.  They accept the same typed configs as
the underlying modules and return plain result objects; file output and
argument parsing live in :mod:`qnoise.cli`.

Seeding: every workflow derives all of its randomness from the sampler's
base seed through the (seed, stream, chunk) grid, so rerunning a workflow
with an identical config reproduces it bit for bit.  The power scan gives
point ``k`` the child seed of cell (seed, scan stream, k); the detector
noise of the oscillator-off reference record in :func:`run_psd` comes
from cell (seed, electronic stream, 1) so it never reuses the draw added
to the signal record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._seeding import STREAM_ELECTRONIC, STREAM_SCAN, derive_seed
from .controller import ControllerConfig, ControllerState, SimulationEnvironment, run_until_balanced
from .detector import (
    BalancedDetectorConfig,
    apply_detector,
    shot_noise_psd,
    vacuum_to_ampere_scale,
)
from .homodyne import (
    LocalOscillator,
    analytic_moments,
    balance_phase,
    coefficients_from_transfer,
)
from .interferometer import InterferometerConfig, compose_transfer
from .qrng import (
    AdcConfig,
    BitStream,
    RandomnessReport,
    extract,
    min_entropy,
    quantize,
    randomness_checks,
)
from .sampling import (
    NoiseTimeSeries,
    PsdEstimate,
    SamplerConfig,
    estimate_psd,
    generate_timeseries,
)

__all__ = [
    "FringeScanResult",
    "BalanceResult",
    "PsdRunResult",
    "PowerScanResult",
    "QrngResult",
    "resolve_phase",
    "run_fringe",
    "run_balance",
    "run_psd",
    "run_power_scan",
    "run_qrng",
]


@dataclass(frozen=True)
class FringeScanResult:
    """Analytic sweep of the static response against the arm phase."""

    phases: np.ndarray
    dc_mean: np.ndarray
    port1_power: np.ndarray
    port2_power: np.ndarray
    visibility: float
    balance_phase_rad: float  # nan when no intensity null exists


@dataclass(frozen=True)
class BalanceResult:
    """Outcome of one feedback run against the simulated plant."""

    state: ControllerState
    trace: list[tuple[int, float, float, float]]
    predicted_phase_rad: float
    phase_error_rad: float


@dataclass(frozen=True)
class PsdRunResult:
    """Calibrated spectra of one record, with the oscillator-off reference.

    ``detected`` and ``reference`` are in A^2/Hz when a detector config is
    supplied (``kappa`` then holds the A-per-simulation-unit calibration),
    otherwise in simulation units squared per hertz with ``reference``
    None.  ``shot_model`` is the analytic detected quantum-noise density
    in W/Hz on the same grid, None without a detector.
    """

    frequencies: np.ndarray
    detected: np.ndarray
    reference: np.ndarray | None
    shot_model: np.ndarray | None
    kappa: float | None
    n_averages: int
    analytic_white_level: float


@dataclass(frozen=True)
class PowerScanResult:
    """Record variance against oscillator intensity, with polynomial fits.

    The fit model is var = b1 * I + b2 * I**2 through the origin.
    ``quad_t_stat`` is b2 over its standard error; ``r_squared_linear``
    scores the slope-only fit.
    """

    intensities: np.ndarray
    variances: np.ndarray
    linear_coef: float
    quad_coef: float
    quad_t_stat: float
    r_squared_linear: float
    rin_enabled: bool


@dataclass(frozen=True)
class QrngResult:
    """Extracted bits plus the entropy accounting that sized them."""

    stream: BitStream
    report: RandomnessReport | None
    min_entropy_per_sample: float
    ratio: float
    n_raw_samples: int
    record_sigma: float


def resolve_phase(interferometer: InterferometerConfig, phi: float | None) -> InterferometerConfig:
    """Fill an unset operating phase with the intensity-null phase.

    Raises:
        UnbalanceableError, DegenerateConfigError: no null exists, so the
            phase cannot be defaulted.
    """
    if phi is not None:
        return replace(interferometer, phi=float(phi))
    return replace(
        interferometer,
        phi=balance_phase(interferometer.alpha2, interferometer.eta1, interferometer.eta2),
    )


def run_fringe(
    interferometer: InterferometerConfig,
    lo: LocalOscillator,
    sigma2_vac: float = 0.25,
    n_points: int = 721,
) -> FringeScanResult:
    """Sweep the phase over one full period and report the analytic fringe.

    Mean output powers per port are |U_k1|^2 * I_LO + |U_k2|^2 * 2*sigma2
    (the open port contributes its mean quadrature power).  Visibility is
    (max - min) / (max + min) of the port-1 fringe; with the vacuum input
    silenced it reduces to 2*eta1*eta2 / (eta1^2 + eta2^2) for symmetric
    splitters.
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    phases = np.linspace(0.0, 2.0 * math.pi, n_points)
    dc_mean = np.empty(n_points)
    port1 = np.empty(n_points)
    port2 = np.empty(n_points)
    vac_power = 2.0 * sigma2_vac
    for i, phi in enumerate(phases):
        u = compose_transfer(replace(interferometer, phi=float(phi)))
        coeffs = coefficients_from_transfer(u)
        dc_mean[i] = analytic_moments(coeffs, lo, sigma2_vac)[0]
        gains = np.abs(u) ** 2
        port1[i] = gains[0, 0] * lo.intensity + gains[0, 1] * vac_power
        port2[i] = gains[1, 0] * lo.intensity + gains[1, 1] * vac_power
    peak, trough = float(port1.max()), float(port1.min())
    visibility = (peak - trough) / (peak + trough) if peak + trough > 0.0 else 0.0
    try:
        phi_star = balance_phase(interferometer.alpha2, interferometer.eta1, interferometer.eta2)
    except ValueError:
        phi_star = math.nan
    return FringeScanResult(
        phases=phases,
        dc_mean=dc_mean,
        port1_power=port1,
        port2_power=port2,
        visibility=visibility,
        balance_phase_rad=phi_star,
    )


def run_balance(
    interferometer: InterferometerConfig,
    lo: LocalOscillator,
    sampler: SamplerConfig,
    controller: ControllerConfig,
) -> BalanceResult:
    """Lock the phase to the intensity null and report the landing error.

    The plant starts at the controller's ``start_phase`` (the config's
    ``phi`` is not used; the point of the loop is to find it).  A
    non-convergent run comes back with ``state.converged`` False.

    Raises:
        UnbalanceableError, DegenerateConfigError: no null exists.
    """
    predicted = balance_phase(interferometer.alpha2, interferometer.eta1, interferometer.eta2)
    env = SimulationEnvironment(
        alpha1=interferometer.alpha1,
        alpha2=interferometer.alpha2,
        eta1=interferometer.eta1,
        eta2=interferometer.eta2,
        lo=lo,
        sampler=sampler,
    )
    state, trace = run_until_balanced(env, controller)
    return BalanceResult(
        state=state,
        trace=trace,
        predicted_phase_rad=predicted,
        phase_error_rad=abs(state.phase - predicted),
    )


def _welch(series: NoiseTimeSeries, segment_length: int, window: str) -> PsdEstimate:
    if segment_length > series.n_samples:
        raise ValueError(
            f"segment_length {segment_length} exceeds the record length {series.n_samples}"
        )
    return estimate_psd(series, segment_length, window=window)


def run_psd(
    interferometer: InterferometerConfig,
    lo: LocalOscillator,
    sampler: SamplerConfig,
    detector: BalancedDetectorConfig | None = None,
    p_opt: float | None = None,
    segment_length: int = 4096,
    window: str = "hann",
    n_chunks: int = 1,
) -> tuple[PsdRunResult, NoiseTimeSeries]:
    """Simulate one record and estimate its averaged spectrum.

    Without a detector config the record stays in simulation units.  With
    one (``p_opt`` then required), the record is scaled to amperes so that
    the symmetric phi = pi/2 white level lands on the shot density of the
    total photocurrent, passed through the detection chain, and estimated
    alongside an oscillator-off reference record of equal length (the
    electronic floor alone).  Returns the result and the record that was
    analyzed (detected when a detector is present).
    """
    series = generate_timeseries(interferometer, lo, sampler, n_chunks=n_chunks)
    coeffs = coefficients_from_transfer(compose_transfer(interferometer))
    _, var = analytic_moments(coeffs, lo, sampler.sigma2_vac)
    white_sim = 2.0 * var / sampler.sample_rate

    if detector is None:
        est = _welch(series, segment_length, window)
        result = PsdRunResult(
            frequencies=est.frequencies,
            detected=est.power,
            reference=None,
            shot_model=None,
            kappa=None,
            n_averages=est.n_averages,
            analytic_white_level=white_sim,
        )
        return result, series

    if p_opt is None or p_opt <= 0.0:
        raise ValueError("p_opt (detected optical power, W) is required with a detector")
    kappa = vacuum_to_ampere_scale(
        p_opt,
        detector.mean_responsivity,
        lo.intensity,
        sampler.sigma2_vac,
        sampler.sample_rate,
    )
    ampere = NoiseTimeSeries(
        samples=kappa * series.samples,
        sample_rate=series.sample_rate,
        seed=series.seed,
        label=series.label,
    )
    detected = apply_detector(ampere, detector)
    silent = NoiseTimeSeries(
        samples=np.zeros(series.n_samples),
        sample_rate=series.sample_rate,
        seed=series.seed,
        label="oscillator-off",
    )
    reference = apply_detector(
        silent, detector, seed=derive_seed(sampler.seed, STREAM_ELECTRONIC, 1)
    )
    est_on = _welch(detected, segment_length, window)
    est_off = _welch(reference, segment_length, window)
    result = PsdRunResult(
        frequencies=est_on.frequencies,
        detected=est_on.power,
        reference=est_off.power,
        shot_model=shot_noise_psd(est_on.frequencies, p_opt, detector),
        kappa=kappa,
        n_averages=est_on.n_averages,
        analytic_white_level=white_sim * kappa * kappa,
    )
    return result, detected


def run_power_scan(
    interferometer: InterferometerConfig,
    sampler: SamplerConfig,
    intensities: np.ndarray,
    n_samples_per_point: int | None = None,
) -> PowerScanResult:
    """Measure record variance at each oscillator intensity and fit it.

    A shot-limited record grows linearly with intensity; classical
    intensity noise leaking through an imperfect null adds a quadratic
    component, so the size and significance of the I**2 term is the
    discriminator between the two.  Each point uses an independent child
    seed of the scan stream.
    """
    levels = np.asarray(intensities, dtype=float)
    if levels.size < 3:
        raise ValueError(f"need at least 3 intensities to fit, got {levels.size}")
    if np.any(levels <= 0.0):
        raise ValueError("intensities must be positive")
    n_point = n_samples_per_point or sampler.n_samples
    variances = np.empty(levels.size)
    for k, intensity in enumerate(levels):
        point_sampler = replace(
            sampler,
            n_samples=n_point,
            seed=derive_seed(sampler.seed, STREAM_SCAN, k),
        )
        lo = LocalOscillator(math.sqrt(intensity))
        record = generate_timeseries(interferometer, lo, point_sampler)
        variances[k] = float(record.samples.var())

    design = np.column_stack([levels, levels**2])
    beta, _, _, _ = np.linalg.lstsq(design, variances, rcond=None)
    residuals = variances - design @ beta
    dof = levels.size - 2
    sigma2_hat = float(residuals @ residuals) / dof
    covariance = sigma2_hat * np.linalg.inv(design.T @ design)
    quad_se = math.sqrt(covariance[1, 1])
    quad_t = beta[1] / quad_se if quad_se > 0.0 else math.inf

    slope = float(levels @ variances) / float(levels @ levels)
    lin_residuals = variances - slope * levels
    total = variances - variances.mean()
    r_squared = 1.0 - float(lin_residuals @ lin_residuals) / float(total @ total)

    return PowerScanResult(
        intensities=levels,
        variances=variances,
        linear_coef=float(beta[0]),
        quad_coef=float(beta[1]),
        quad_t_stat=float(quad_t),
        r_squared_linear=r_squared,
        rin_enabled=sampler.rin_dbhz is not None,
    )


def run_qrng(
    interferometer: InterferometerConfig,
    lo: LocalOscillator,
    sampler: SamplerConfig,
    adc: AdcConfig,
    extractor_seed: int,
    ratio: float | None = None,
    block_bits: int = 4096,
    n_chunks: int = 1,
) -> QrngResult:
    """Generate a record, digitize it, and extract near-uniform bits.

    The raw record is digitized as simulated, without detector band
    shaping: band limiting below the sample rate would correlate
    neighboring samples, and the entropy accounting here treats samples
    as independent Gaussian draws.  ``ratio`` defaults to 90% of the
    min-entropy bound.  The statistical battery runs when at least 1e5
    bits come out, and is otherwise reported as None.
    """
    series = generate_timeseries(interferometer, lo, sampler, n_chunks=n_chunks)
    codes = quantize(series, adc)
    sigma = float(series.samples.std())
    h_min = min_entropy(adc, sigma)
    bound = h_min / adc.bits
    chosen = 0.9 * bound if ratio is None else float(ratio)
    stream = extract(
        codes,
        chosen,
        extractor_seed,
        bits_per_sample=adc.bits,
        min_entropy_per_sample=h_min,
        block_bits=block_bits,
    )
    report = randomness_checks(stream) if stream.n_bits >= 100_000 else None
    return QrngResult(
        stream=stream,
        report=report,
        min_entropy_per_sample=h_min,
        ratio=chosen,
        n_raw_samples=series.n_samples,
        record_sigma=sigma,
    )
