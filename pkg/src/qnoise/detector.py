"""Balanced photodetector pair: shot-level PSD, response shaping, CMRR.

Physical units enter here.  A detected record in amperes relates to the
dimensionless difference current through the calibration constant of
:func:`vacuum_to_ampere_scale`, chosen so the symmetric phi = pi/2 white
level reproduces the shot spectral density 2*q*I_ph of the total DC
photocurrent I_ph = responsivity * P_opt.  With that bridge the detected
quantum-noise PSD in watts per hertz into the load is

    N(f) = 2 * q * P_opt * responsivity * R_load * |H(f)|^2

where H is the Butterworth-type detector response of configurable order
and cutoff, |H(0)| = 1.

Filtering in :func:`apply_detector` multiplies the Fourier amplitudes by
the analytic H(f), so the realized spectrum carries the exact analog
magnitude response (no bilinear warping); the electronic noise floor is
added after the filter as white Gaussian current noise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.constants import e as _ELEMENTARY_CHARGE

from ._seeding import STREAM_ELECTRONIC, derive_rng
from .sampling import NoiseTimeSeries

__all__ = [
    "PhotodiodeParams",
    "BalancedDetectorConfig",
    "ClearanceReport",
    "shot_noise_psd",
    "transfer_function",
    "apply_detector",
    "cmrr",
    "clearance",
    "vacuum_to_ampere_scale",
    "save_psd_csv",
    "save_clearance_csv",
]


@dataclass(frozen=True)
class PhotodiodeParams:
    """Single-diode electrical parameters (SI units)."""

    responsivity: float = 0.78
    dark_current: float = 1e-6
    saturation_current: float = 0.03
    bandwidth: float = 1e10

    def __post_init__(self) -> None:
        if self.responsivity <= 0.0:
            raise ValueError(f"responsivity must be positive, got {self.responsivity}")
        if self.responsivity > 1.25:
            # ~1.25 A/W is the 1550 nm unity-quantum-efficiency limit
            warnings.warn(
                f"responsivity {self.responsivity} A/W exceeds the unity-QE limit",
                stacklevel=2,
            )
        if self.dark_current < 0.0 or self.saturation_current <= 0.0 or self.bandwidth <= 0.0:
            raise ValueError("dark_current >= 0, saturation_current > 0, bandwidth > 0 required")


@dataclass(frozen=True)
class BalancedDetectorConfig:
    """Two diodes plus the shared electrical chain.

    ``balance_mismatch`` is the residual fractional gain difference after
    trimming; ``path_delay`` the arrival-time skew between the diodes (the
    two together set the common-mode rejection).  ``electronic_noise_dbm_hz``
    is the output-referred floor into the load, None to disable.
    """

    diode_a: PhotodiodeParams = PhotodiodeParams()
    diode_b: PhotodiodeParams = PhotodiodeParams()
    load_resistance: float = 50.0
    transfer_cutoff: float = 4e9
    transfer_order: int = 2
    electronic_noise_dbm_hz: float | None = -168.0
    balance_mismatch: float = 1e-3
    path_delay: float = 1.2e-11
    cmrr_ceiling_db: float = 120.0

    def __post_init__(self) -> None:
        if self.load_resistance <= 0.0:
            raise ValueError(f"load_resistance must be positive, got {self.load_resistance}")
        if self.transfer_cutoff <= 0.0 or self.transfer_order < 1:
            raise ValueError("transfer_cutoff > 0 and transfer_order >= 1 required")
        if not 0.0 <= self.balance_mismatch < 1.0:
            raise ValueError(f"balance_mismatch must lie in [0, 1), got {self.balance_mismatch}")
        if self.path_delay < 0.0:
            raise ValueError(f"path_delay must be nonnegative, got {self.path_delay}")

    @property
    def mean_responsivity(self) -> float:
        return 0.5 * (self.diode_a.responsivity + self.diode_b.responsivity)

    @property
    def electronic_noise_w_hz(self) -> float:
        """Floor converted to W/Hz; 0 when disabled."""
        if self.electronic_noise_dbm_hz is None:
            return 0.0
        return 1e-3 * 10.0 ** (self.electronic_noise_dbm_hz / 10.0)


@dataclass(frozen=True)
class ClearanceReport:
    """Quantum-to-floor margin over a frequency grid."""

    frequencies: np.ndarray
    quantum_psd: np.ndarray
    floor_psd: np.ndarray
    clearance_db: np.ndarray
    band_limit_hz: float
    threshold_db: float


def transfer_function(f, det: BalancedDetectorConfig):
    """Complex Butterworth response at frequency f (Hz); |H(0)| = 1.

    Accepts scalars or arrays and follows the input shape.
    """
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    b, a = signal.butter(det.transfer_order, 2.0 * math.pi * det.transfer_cutoff,
                         btype="low", analog=True)
    _, h = signal.freqs(b, a, worN=2.0 * math.pi * np.abs(f_arr))
    return h if np.ndim(f) else complex(h[0])


def shot_noise_psd(f, p_opt: float, det: BalancedDetectorConfig):
    """Quantum-noise PSD into the load, W/Hz, at detected power p_opt (W).

    2*q*P_opt*responsivity*R_load at DC, rolled off by |H(f)|^2.
    """
    if p_opt < 0.0:
        raise ValueError(f"p_opt must be nonnegative, got {p_opt}")
    h = transfer_function(f, det)
    flat = 2.0 * _ELEMENTARY_CHARGE * p_opt * det.mean_responsivity * det.load_resistance
    return flat * np.abs(h) ** 2


def vacuum_to_ampere_scale(
    p_opt: float,
    responsivity: float,
    lo_intensity: float,
    sigma2_vac: float,
    sample_rate: float,
) -> float:
    """Calibration constant kappa (A per dimensionless current unit).

    Fixed by requiring the symmetric phi = pi/2 record, whose one-sided
    white-noise level is 8*I_LO*sigma2/sample_rate in simulation units, to map
    onto the shot density 2*q*responsivity*P_opt:

        kappa = sqrt(q * responsivity * P_opt * sample_rate
                     / (4 * I_LO * sigma2_vac))
    """
    if min(p_opt, responsivity, lo_intensity, sigma2_vac, sample_rate) <= 0.0:
        raise ValueError("all calibration inputs must be positive")
    return math.sqrt(
        _ELEMENTARY_CHARGE * responsivity * p_opt * sample_rate
        / (4.0 * lo_intensity * sigma2_vac)
    )


def apply_detector(
    series: NoiseTimeSeries,
    det: BalancedDetectorConfig,
    common_mode: NoiseTimeSeries | None = None,
    seed: int | None = None,
) -> NoiseTimeSeries:
    """Run a current record (amperes) through the detection chain.

    Stages, in order: response filtering by the analytic H(f); residual
    common-mode leakage balance_mismatch * common_mode when a summed-
    current record is supplied; additive white electronic noise; clipping
    at the smaller diode saturation.  The electronic-noise draw is seeded
    from ``seed``, falling back to the record's own seed, so the transform
    is reproducible.
    """
    if series.sample_rate < 2.0 * det.transfer_cutoff:
        warnings.warn(
            f"sample_rate {series.sample_rate:g} Hz is below twice the "
            f"transfer cutoff {det.transfer_cutoff:g} Hz; the filtered band is aliased",
            stacklevel=2,
        )
    n = series.n_samples
    freqs = np.fft.rfftfreq(n, d=1.0 / series.sample_rate)
    h = transfer_function(freqs, det)
    out = np.fft.irfft(np.fft.rfft(series.samples) * h, n=n)

    if common_mode is not None:
        if common_mode.n_samples != n:
            raise ValueError("common_mode record length must match the input record")
        out = out + det.balance_mismatch * common_mode.samples

    noise_w_hz = det.electronic_noise_w_hz
    if noise_w_hz > 0.0:
        current_psd = noise_w_hz / det.load_resistance  # A^2/Hz into the load
        sigma = math.sqrt(current_psd * 0.5 * series.sample_rate)
        rng = derive_rng(seed if seed is not None else (series.seed or 0), STREAM_ELECTRONIC)
        out = out + rng.normal(0.0, sigma, size=n)

    limit = min(det.diode_a.saturation_current, det.diode_b.saturation_current)
    clipped = np.abs(out) > limit
    if np.any(clipped):
        warnings.warn(
            f"{int(clipped.sum())} of {n} samples clipped at the "
            f"{limit:g} A saturation limit",
            stacklevel=2,
        )
        out = np.clip(out, -limit, limit)

    label = f"{series.label}+detector" if series.label else "detector"
    return NoiseTimeSeries(out, series.sample_rate, seed=series.seed, label=label)


def cmrr(f, det: BalancedDetectorConfig):
    """Common-mode rejection ratio in dB at frequency f.

    Model: the two diode branches have gains g = R_diode/R_mean scaled by
    (1 +/- balance_mismatch/2) and a relative delay ``path_delay``.  The
    ratio of the differential response |g_a + g_b e^{-i w tau}| to the
    common-mode residual |g_a - g_b e^{-i w tau}| is reported in dB and
    capped at ``cmrr_ceiling_db`` (perfectly matched branches reject
    exactly).
    """
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    r_mean = det.mean_responsivity
    g_a = (det.diode_a.responsivity / r_mean) * (1.0 + 0.5 * det.balance_mismatch)
    g_b = (det.diode_b.responsivity / r_mean) * (1.0 - 0.5 * det.balance_mismatch)
    rot = np.exp(-2j * math.pi * f_arr * det.path_delay)
    differential = np.abs(g_a + g_b * rot)
    residual = np.abs(g_a - g_b * rot)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(differential / residual)
    db = np.minimum(db, det.cmrr_ceiling_db)
    return db if np.ndim(f) else float(db[0])


def clearance(
    p_opt: float,
    det: BalancedDetectorConfig,
    frequencies: np.ndarray,
    threshold_db: float = 12.0,
    cap_db: float = 200.0,
) -> ClearanceReport:
    """Pointwise margin of quantum noise plus floor over the floor alone.

    The floor is the electronic noise plus the (filtered) dark-current
    shot density of both diodes.  ``band_limit_hz`` is the largest grid
    frequency up to which the clearance stays at or above the threshold
    contiguously from DC (0.0 if it fails already at the first point).
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.size == 0:
        raise ValueError("frequency grid must be nonempty")
    quantum = shot_noise_psd(freqs, p_opt, det)
    h2 = np.abs(transfer_function(freqs, det)) ** 2
    dark = (
        2.0
        * _ELEMENTARY_CHARGE
        * (det.diode_a.dark_current + det.diode_b.dark_current)
        * det.load_resistance
        * h2
    )
    floor = det.electronic_noise_w_hz + dark
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(floor > 0.0, quantum / np.where(floor > 0.0, floor, 1.0), np.inf)
        clear_db = 10.0 * np.log10(1.0 + ratio)
    clear_db = np.minimum(np.nan_to_num(clear_db, posinf=cap_db), cap_db)

    band_limit = 0.0
    for f, c in zip(freqs, clear_db):
        if c >= threshold_db:
            band_limit = float(f)
        else:
            break
    return ClearanceReport(
        frequencies=freqs,
        quantum_psd=quantum,
        floor_psd=floor,
        clearance_db=clear_db,
        band_limit_hz=band_limit,
        threshold_db=threshold_db,
    )


def save_psd_csv(path, frequencies: np.ndarray, columns: dict[str, np.ndarray]) -> None:
    """Write a (frequency_hz, *columns) table; dB columns get 6 significant digits."""
    import csv

    names = list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz"] + names)
        for i, f in enumerate(frequencies):
            row = [f"{f:.12g}"]
            for name in names:
                value = columns[name][i]
                row.append(f"{value:.6g}" if "_db" in name else f"{value:.12g}")
            writer.writerow(row)


def save_clearance_csv(path, report: ClearanceReport) -> None:
    save_psd_csv(
        path,
        report.frequencies,
        {
            "quantum_psd_w_hz": report.quantum_psd,
            "floor_psd_w_hz": report.floor_psd,
            "clearance_db": report.clearance_db,
        },
    )
