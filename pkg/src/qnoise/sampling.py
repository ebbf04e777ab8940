"""Monte-Carlo generation of difference-current records and PSD estimation.

One sample is one independent quadrature draw; ``sample_rate`` fixes the
physical spacing of those draws and therefore the Nyquist band that all
power spectral densities refer to.  The open-port quadratures are
independent zero-mean Gaussians with variance ``sigma2_vac`` each
(defaulting to the 1/4 vacuum convention), so the symmetric phi = pi/2
setting produces a white record of variance ``4 * I_LO * sigma2_vac``.

Laser intensity noise is modeled as a fractional fluctuation ``delta(t)``
with a flat one-sided PSD ``10**(rin_dbhz/10)`` rolled off by a single
real pole at ``rin_bandwidth``.  The shaping is done on the Fourier
amplitudes directly, so the realized spectrum follows the analytic pole
shape with no discretization warping and the expected fractional variance
is ``S0 * B * arctan(f_nyquist / B)``.

Reproducibility: all draws derive from ``SamplerConfig.seed`` through the
stream/chunk grid in ``_seeding``.  The chunk layout is part of the
contract; the same seed and layout give bit-identical records, while a
different ``n_chunks`` is a different (equally valid) record.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from ._seeding import STREAM_RIN, STREAM_VACUUM, derive_rng
from .homodyne import LocalOscillator, QuadratureSample, _evaluate, coefficients_from_transfer
from .interferometer import InterferometerConfig, compose_transfer

__all__ = [
    "SamplerConfig",
    "NoiseTimeSeries",
    "PsdEstimate",
    "sample_vacuum",
    "sample_lo_intensity",
    "generate_timeseries",
    "estimate_psd",
    "save_timeseries_csv",
    "load_timeseries_csv",
    "save_timeseries_binary",
    "load_timeseries_binary",
]

_BINARY_MAGIC = b"QNTS"
_BINARY_VERSION = 1
_HEADER = struct.Struct("<4sIdQ")  # magic, version, sample_rate, n_samples


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs of the stochastic record generator.

    Args:
        seed: 64-bit base seed for all derived streams.
        sample_rate: samples per second; one sample per quadrature draw.
        n_samples: record length.
        sigma2_vac: per-quadrature Gaussian variance (1/4 = vacuum units).
        rin_dbhz: one-sided fractional intensity-noise PSD in dB/Hz, or
            None for a noiseless oscillator.
        rin_bandwidth: single-pole cutoff of the intensity noise, Hz.
    """

    seed: int
    sample_rate: float
    n_samples: int
    sigma2_vac: float = 0.25
    rin_dbhz: float | None = None
    rin_bandwidth: float = 0.0

    def __post_init__(self) -> None:
        if self.sample_rate <= 0.0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.sigma2_vac < 0.0:
            raise ValueError(f"sigma2_vac must be nonnegative, got {self.sigma2_vac}")
        if self.rin_dbhz is not None and self.rin_bandwidth <= 0.0:
            raise ValueError("rin_bandwidth must be positive when rin_dbhz is set")


@dataclass(frozen=True)
class NoiseTimeSeries:
    """A sampled current record plus the settings needed to regenerate it."""

    samples: np.ndarray
    sample_rate: float
    seed: int | None = None
    label: str = ""

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided averaged-periodogram estimate."""

    frequencies: np.ndarray
    power: np.ndarray
    n_averages: int


def _chunk_sizes(n: int, n_chunks: int) -> list[int]:
    if n_chunks < 1:
        raise ValueError(f"n_chunks must be >= 1, got {n_chunks}")
    base, extra = divmod(n, n_chunks)
    return [base + (1 if i < extra else 0) for i in range(n_chunks)]


def _vacuum_chunk(config: SamplerConfig, chunk: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    rng = derive_rng(config.seed, STREAM_VACUUM, chunk)
    draws = rng.normal(0.0, np.sqrt(config.sigma2_vac), size=(2, n))
    return draws[0], draws[1]


def _rin_chunk(config: SamplerConfig, chunk: int, n: int) -> np.ndarray:
    """Fractional intensity fluctuation delta(t) for one chunk."""
    if config.rin_dbhz is None or n == 0:
        return np.zeros(n)
    s0 = 10.0 ** (config.rin_dbhz / 10.0)
    nyquist = 0.5 * config.sample_rate
    rng = derive_rng(config.seed, STREAM_RIN, chunk)
    white = rng.normal(0.0, np.sqrt(s0 * nyquist), size=n)
    freqs = np.fft.rfftfreq(n, d=1.0 / config.sample_rate)
    shape = 1.0 / np.sqrt(1.0 + (freqs / config.rin_bandwidth) ** 2)
    return np.fft.irfft(np.fft.rfft(white) * shape, n=n)


def sample_vacuum(config: SamplerConfig, n_chunks: int = 1) -> QuadratureSample:
    """Draw the open-port quadrature record as two arrays of length n_samples."""
    xs, ys = [], []
    for chunk, n in enumerate(_chunk_sizes(config.n_samples, n_chunks)):
        x, y = _vacuum_chunk(config, chunk, n)
        xs.append(x)
        ys.append(y)
    return QuadratureSample(np.concatenate(xs), np.concatenate(ys))


def sample_lo_intensity(
    config: SamplerConfig, mean_intensity: float, n_chunks: int = 1
) -> np.ndarray:
    """Oscillator intensity record mean * (1 + delta(t)); constant with RIN off."""
    if mean_intensity < 0.0:
        raise ValueError(f"mean_intensity must be nonnegative, got {mean_intensity}")
    parts = [
        _rin_chunk(config, chunk, n)
        for chunk, n in enumerate(_chunk_sizes(config.n_samples, n_chunks))
    ]
    delta = np.concatenate(parts)
    return mean_intensity * (1.0 + delta)


def generate_timeseries(
    interferometer: InterferometerConfig,
    lo: LocalOscillator,
    sampler: SamplerConfig,
    n_chunks: int = 1,
) -> NoiseTimeSeries:
    """Simulate the difference-current record for one static setting.

    The interferometer enters only through its transfer matrix.  With RIN
    enabled, the oscillator amplitude is rescaled per sample by
    sqrt(1 + delta(t)), which carries the intensity fluctuation into both
    the direct intensity term and the quadrature gains.
    """
    coeffs = coefficients_from_transfer(compose_transfer(interferometer))
    base_intensity = lo.intensity
    out = np.empty(sampler.n_samples)
    offset = 0
    for chunk, n in enumerate(_chunk_sizes(sampler.n_samples, n_chunks)):
        x, y = _vacuum_chunk(sampler, chunk, n)
        if sampler.rin_dbhz is None:
            eps_r, eps_i, intensity = lo.eps_real, lo.eps_imag, base_intensity
        else:
            delta = _rin_chunk(sampler, chunk, n)
            # clip guards the (astronomically unlikely) delta < -1 draw
            scale = np.sqrt(np.clip(1.0 + delta, 0.0, None))
            eps_r = lo.eps_real * scale
            eps_i = lo.eps_imag * scale
            intensity = base_intensity * scale * scale
        out[offset : offset + n] = _evaluate(coeffs, eps_r, eps_i, intensity, x, y)
        offset += n
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("difference-current record contains non-finite values")
    return NoiseTimeSeries(
        samples=out,
        sample_rate=sampler.sample_rate,
        seed=sampler.seed,
        label="difference-current",
    )


def estimate_psd(
    series: NoiseTimeSeries,
    segment_length: int,
    window: str = "hann",
) -> PsdEstimate:
    """One-sided averaged-periodogram PSD of a record.

    hann segments overlap by 50%, rectangular segments do not.  No
    detrending is applied, so a DC offset lands in the f = 0 bin.  A white
    record of variance s2 averages to the flat level 2*s2/sample_rate.

    Raises:
        ValueError: unknown window or segment_length > record length.
    """
    if window not in ("hann", "rectangular"):
        raise ValueError(f"window must be 'hann' or 'rectangular', got {window!r}")
    n = series.n_samples
    if not 1 <= segment_length <= n:
        raise ValueError(
            f"segment_length must lie in [1, {n}], got {segment_length}"
        )
    win = "hann" if window == "hann" else "boxcar"
    noverlap = segment_length // 2 if window == "hann" else 0
    freqs, power = signal.welch(
        series.samples,
        fs=series.sample_rate,
        window=win,
        nperseg=segment_length,
        noverlap=noverlap,
        detrend=False,
        scaling="density",
        return_onesided=True,
    )
    step = segment_length - noverlap
    n_averages = 1 + (n - segment_length) // step
    return PsdEstimate(frequencies=freqs, power=power, n_averages=n_averages)


def save_timeseries_csv(path: str | Path, series: NoiseTimeSeries) -> None:
    """Write (index, time_s, current) rows with a header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "time_s", "current"])
        dt = 1.0 / series.sample_rate
        for i, value in enumerate(series.samples):
            writer.writerow([i, f"{i * dt:.12g}", f"{value:.12g}"])


def load_timeseries_csv(path: str | Path, label: str = "") -> NoiseTimeSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["index", "time_s", "current"]:
            raise ValueError(f"unexpected CSV header {header}")
        times, values = [], []
        for row in reader:
            times.append(float(row[1]))
            values.append(float(row[2]))
    if len(values) < 2:
        raise ValueError("need at least two rows to infer the sample rate")
    sample_rate = 1.0 / (times[1] - times[0])
    return NoiseTimeSeries(np.array(values), sample_rate, seed=None, label=label)


def save_timeseries_binary(path: str | Path, series: NoiseTimeSeries) -> None:
    """Compact little-endian layout: magic, u32 version, f64 rate, u64 n, f64 data."""
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(_BINARY_MAGIC, _BINARY_VERSION, series.sample_rate, series.n_samples)
        )
        fh.write(np.ascontiguousarray(series.samples, dtype="<f8").tobytes())


def load_timeseries_binary(path: str | Path, label: str = "") -> NoiseTimeSeries:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError("truncated header")
        magic, version, sample_rate, n = _HEADER.unpack(header)
        if magic != _BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != _BINARY_VERSION:
            raise ValueError(f"unsupported version {version}")
        data = np.frombuffer(fh.read(8 * n), dtype="<f8")
        if data.size != n:
            raise ValueError("truncated sample data")
    return NoiseTimeSeries(data.astype(np.float64), sample_rate, seed=None, label=label)
