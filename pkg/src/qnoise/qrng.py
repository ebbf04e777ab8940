"""Digitization, entropy accounting, and seeded extraction of random bits.

A detected noise record becomes bits in three stages.  A mid-rise
quantizer spans +/- ``full_scale_sigma`` measured standard deviations with
``2**bits`` uniform cells; values on a cell boundary take the upper cell
and out-of-range values clamp to the end codes, so an input of exactly
zero lands on code ``2**(bits-1)``.  The worst-case (min-) entropy per
sample is the largest Gaussian cell mass, with the clamped tails folded
into the end cells.  Extraction multiplies blocks of raw bits by a
Toeplitz matrix over GF(2) whose diagonals come from a seeded generator;
the construction is linear, deterministic for a given seed, and emits
exactly ``floor(ratio * n_raw_bits)`` output bits (block k emits
``floor(ratio*c(k)) - floor(ratio*c(k-1))`` bits where c(k) counts raw
bits consumed so far, which telescopes to the total).  The extraction
ratio may never exceed min-entropy per raw bit.

Output bits are packed most-significant-bit first within each byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .sampling import NoiseTimeSeries

__all__ = [
    "AdcConfig",
    "BitStream",
    "RandomnessReport",
    "quantize",
    "min_entropy",
    "extract",
    "randomness_checks",
    "unpack_bits",
]

DEFAULT_BLOCK_BITS = 4096
Z_THRESHOLD = 3.29  # two-sided alpha ~ 1e-3


@dataclass(frozen=True)
class AdcConfig:
    """Mid-rise digitizer: 2**bits cells across +/- full_scale_sigma sigmas."""

    bits: int = 8
    full_scale_sigma: float = 4.0

    def __post_init__(self) -> None:
        if not 1 <= self.bits <= 24:
            raise ValueError(f"bits must lie in [1, 24], got {self.bits}")
        if self.full_scale_sigma <= 0.0:
            raise ValueError(
                f"full_scale_sigma must be positive, got {self.full_scale_sigma}"
            )


@dataclass(frozen=True)
class BitStream:
    """Packed extractor output plus its entropy bookkeeping."""

    bits: np.ndarray  # packed uint8, MSB first
    n_bits: int
    source_min_entropy: float
    extraction_ratio: float


@dataclass(frozen=True)
class RandomnessReport:
    """z-statistics of the quick sanity battery; pass = all |z| < threshold."""

    monobit_z: float
    runs_z: float
    autocorr_z: float
    threshold: float
    passed: bool


def quantize(series: NoiseTimeSeries, adc: AdcConfig) -> np.ndarray:
    """Digitize a record to integer codes in [0, 2**bits).

    The full scale is sigma-relative: +/- full_scale_sigma times the
    record's own standard deviation.

    Raises:
        ValueError: the record has zero variance, so no scale exists.
    """
    sigma = float(series.samples.std())
    if sigma == 0.0:
        raise ValueError("record has zero variance, cannot set the quantizer scale")
    half_range = adc.full_scale_sigma * sigma
    n_codes = 1 << adc.bits
    cell = 2.0 * half_range / n_codes
    codes = np.floor((series.samples + half_range) / cell).astype(np.int64)
    return np.clip(codes, 0, n_codes - 1)


def min_entropy(adc: AdcConfig, sigma: float) -> float:
    """Worst-case entropy per sample of the quantized Gaussian, in bits.

    Cell masses are exact Gaussian integrals (CDF differences), with the
    clamped tails folded into the two end cells.

    Raises:
        ValueError: sigma <= 0.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    n_codes = 1 << adc.bits
    edges = np.linspace(-adc.full_scale_sigma, adc.full_scale_sigma, n_codes + 1)
    cdf = ndtr(edges)  # sigma cancels: edges are in units of sigma
    masses = np.diff(cdf)
    masses[0] += cdf[0]
    masses[-1] += 1.0 - cdf[-1]
    return float(-np.log2(masses.max()))


def _codes_to_bits(codes: np.ndarray, bits_per_sample: int) -> np.ndarray:
    shifts = np.arange(bits_per_sample - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def _toeplitz_block(diagonals: np.ndarray, block: np.ndarray, n_out: int) -> np.ndarray:
    """n_out rows of the Toeplitz product T @ block over GF(2).

    T[i, j] = d[i - j + len(block) - 1], evaluated through an ordinary
    convolution; the counts stay far below 2**53 so rounding the float
    convolution recovers the exact integers.
    """
    width = block.size
    conv = fftconvolve(diagonals[: n_out + width - 1].astype(np.float64),
                       block.astype(np.float64))
    counts = np.rint(conv[width - 1 : width - 1 + n_out]).astype(np.int64)
    return (counts & 1).astype(np.uint8)


def extract(
    codes: np.ndarray,
    ratio: float,
    extractor_seed: int,
    *,
    bits_per_sample: int,
    min_entropy_per_sample: float,
    block_bits: int = DEFAULT_BLOCK_BITS,
) -> BitStream:
    """Compress raw sample bits into nearly uniform output bits.

    Raw bits (MSB first per code) are processed in blocks of
    ``block_bits``; every block is multiplied by the Toeplitz matrix drawn
    once from ``extractor_seed``.  The block layout is part of the
    determinism contract.  Output length is exactly
    floor(ratio * total raw bits).

    Raises:
        ValueError: ratio above the min-entropy bound, or not in (0, 1].
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must lie in (0, 1], got {ratio}")
    bound = min_entropy_per_sample / bits_per_sample
    if ratio > bound + 1e-12:
        raise ValueError(
            f"ratio {ratio:.6g} exceeds the entropy bound "
            f"{bound:.6g} bits out per raw bit"
        )
    raw = _codes_to_bits(np.asarray(codes, dtype=np.int64), bits_per_sample)
    total_out = int(math.floor(ratio * raw.size))

    rng = np.random.default_rng(extractor_seed)
    max_rows = int(math.ceil(ratio * block_bits)) + 1
    diagonals = rng.integers(0, 2, size=max_rows + block_bits - 1, dtype=np.uint8)

    pieces: list[np.ndarray] = []
    consumed = 0
    emitted = 0
    for start in range(0, raw.size, block_bits):
        block = raw[start : start + block_bits]
        consumed += block.size
        target = int(math.floor(ratio * consumed))
        n_out = target - emitted
        if n_out > 0:
            pieces.append(_toeplitz_block(diagonals, block, n_out))
            emitted += n_out
    out = np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.uint8)
    assert out.size == total_out
    return BitStream(
        bits=np.packbits(out),
        n_bits=total_out,
        source_min_entropy=min_entropy_per_sample,
        extraction_ratio=ratio,
    )


def unpack_bits(stream: BitStream) -> np.ndarray:
    """The stream as a flat 0/1 uint8 array of length n_bits."""
    return np.unpackbits(stream.bits)[: stream.n_bits]


def randomness_checks(stream: BitStream) -> RandomnessReport:
    """Monobit, runs, and lag-1 autocorrelation z-tests.

    These are quick sanity gates on obvious defects (bias, clustering,
    serial correlation), not a certification battery.

    Raises:
        ValueError: fewer than 1e5 bits, where the normal approximations
            and the power of the tests degrade.
    """
    bits = unpack_bits(stream)
    n = bits.size
    if n < 100_000:
        raise ValueError(f"need at least 1e5 bits for the battery, got {n}")

    ones = int(bits.sum())
    monobit_z = (2.0 * ones - n) / math.sqrt(n)

    n1, n0 = ones, n - ones
    if n1 == 0 or n0 == 0:
        runs_z = math.inf
    else:
        runs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
        mu = 1.0 + 2.0 * n1 * n0 / n
        var = 2.0 * n1 * n0 * (2.0 * n1 * n0 - n) / (n * n * (n - 1.0))
        runs_z = (runs - mu) / math.sqrt(var)

    centered = bits.astype(np.float64) - bits.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        autocorr_z = math.inf
    else:
        r1 = float(np.dot(centered[:-1], centered[1:])) / denom
        autocorr_z = r1 * math.sqrt(n - 1.0)

    zs = (monobit_z, runs_z, autocorr_z)
    passed = all(math.isfinite(z) and abs(z) < Z_THRESHOLD for z in zs)
    return RandomnessReport(
        monobit_z=float(monobit_z),
        runs_z=float(runs_z),
        autocorr_z=float(autocorr_z),
        threshold=Z_THRESHOLD,
        passed=passed,
    )
