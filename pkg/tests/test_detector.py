import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.constants import e as q_e

from qnoise.detector import (
    BalancedDetectorConfig,
    PhotodiodeParams,
    apply_detector,
    clearance,
    cmrr,
    save_psd_csv,
    shot_noise_psd,
    transfer_function,
    vacuum_to_ampere_scale,
)
from qnoise.sampling import NoiseTimeSeries

DEFAULT = BalancedDetectorConfig()


def test_transfer_function_butterworth_landmarks():
    assert_allclose(abs(transfer_function(0.0, DEFAULT)), 1.0, atol=1e-12)
    # half-power point at the cutoff for any order
    for order in (1, 2, 4):
        det = BalancedDetectorConfig(transfer_order=order)
        assert_allclose(abs(transfer_function(det.transfer_cutoff, det)) ** 2, 0.5, rtol=1e-9)
    # order-2 asymptote falls 40 dB per decade
    det2 = BalancedDetectorConfig(transfer_order=2)
    h2 = abs(transfer_function(10.0 * det2.transfer_cutoff, det2)) ** 2
    assert_allclose(h2, 1e-4, rtol=0.02)


def test_shot_noise_psd_dc_value():
    det = BalancedDetectorConfig()
    expected = 2.0 * q_e * 0.05 * det.mean_responsivity * det.load_resistance
    assert_allclose(shot_noise_psd(0.0, 0.05, det), expected, rtol=1e-12)
    with pytest.raises(ValueError):
        shot_noise_psd(0.0, -1.0, det)


def test_shot_noise_hand_value_one_milliwatt():
    # 2 * q * 1 mW * 0.78 A/W * 50 ohm
    n0 = shot_noise_psd(0.0, 1e-3, DEFAULT)
    assert_allclose(n0, 1.2496977745e-20, rtol=1e-6)
    assert abs(n0 - 1.25e-20) / 1.25e-20 < 0.01


def test_ampere_calibration_reproduces_shot_level():
    # white record with the symmetric phi = pi/2 variance, scaled to amperes
    rng = np.random.default_rng(41)
    intensity, sigma2, fs = 1e8, 0.25, 1e10
    p_opt = 0.01
    kappa = vacuum_to_ampere_scale(p_opt, DEFAULT.mean_responsivity, intensity, sigma2, fs)
    n = 1 << 19
    sim = rng.normal(0.0, math.sqrt(4.0 * intensity * sigma2), n)
    level = 2.0 * np.var(kappa * sim) / fs
    assert_allclose(level, 2.0 * q_e * DEFAULT.mean_responsivity * p_opt, rtol=0.02)


def test_apply_detector_shapes_white_noise():
    rng = np.random.default_rng(43)
    fs = 1e10
    n = 1 << 19
    series = NoiseTimeSeries(rng.normal(0.0, 1e-6, n), fs, seed=43)
    det = BalancedDetectorConfig(electronic_noise_dbm_hz=None)
    out = apply_detector(series, det)
    spec_in = np.abs(np.fft.rfft(series.samples)) ** 2
    spec_out = np.abs(np.fft.rfft(out.samples)) ** 2
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    h2 = np.abs(transfer_function(freqs, det)) ** 2
    band = slice(1, -1)
    assert_allclose(spec_out[band], spec_in[band] * h2[band], rtol=1e-8)


def test_apply_detector_adds_electronic_floor():
    fs = 1e10
    n = 1 << 18
    silent = NoiseTimeSeries(np.zeros(n), fs, seed=9)
    out = apply_detector(silent, DEFAULT)
    floor_a2 = DEFAULT.electronic_noise_w_hz / DEFAULT.load_resistance
    assert_allclose(out.samples.var(), floor_a2 * fs / 2.0, rtol=0.02)
    # same seed, same noise
    again = apply_detector(silent, DEFAULT)
    assert np.array_equal(out.samples, again.samples)
    other = apply_detector(silent, DEFAULT, seed=10)
    assert not np.array_equal(out.samples, other.samples)


def test_apply_detector_clips_at_saturation():
    fs = 1e10
    samples = np.zeros(4096)
    samples[100] = 1.0  # far above the 30 mA limit
    series = NoiseTimeSeries(samples, fs, seed=1)
    det = BalancedDetectorConfig(electronic_noise_dbm_hz=None, transfer_cutoff=4.9e9)
    with pytest.warns(UserWarning, match="clipped"):
        out = apply_detector(series, det)
    limit = det.diode_a.saturation_current
    assert out.samples.max() <= limit + 1e-15


def test_apply_detector_common_mode_leakage():
    fs = 1e10
    n = 4096
    silent = NoiseTimeSeries(np.zeros(n), fs, seed=2)
    common = NoiseTimeSeries(np.ones(n), fs)
    det = BalancedDetectorConfig(electronic_noise_dbm_hz=None)
    out = apply_detector(silent, det, common_mode=common)
    assert_allclose(out.samples, det.balance_mismatch * np.ones(n), atol=1e-12)
    short = NoiseTimeSeries(np.ones(n - 1), fs)
    with pytest.raises(ValueError):
        apply_detector(silent, det, common_mode=short)


def test_apply_detector_warns_on_aliased_band():
    series = NoiseTimeSeries(np.zeros(1024), 5e9, seed=3)
    with pytest.warns(UserWarning, match="aliased"):
        apply_detector(series, BalancedDetectorConfig(electronic_noise_dbm_hz=None))


def test_cmrr_dc_value_and_rolloff():
    # equal diodes: CMRR(0) = 20 log10(2 / mismatch)
    assert_allclose(cmrr(0.0, DEFAULT), 20.0 * math.log10(2.0 / 1e-3), rtol=1e-9)
    grid = np.linspace(0.0, 5e9, 501)
    curve = cmrr(grid, DEFAULT)
    assert np.all(np.diff(curve) <= 1e-9)
    assert curve[grid <= 3e9].min() >= 15.0


def test_cmrr_ceiling_caps_perfect_match():
    det = BalancedDetectorConfig(balance_mismatch=0.0, path_delay=0.0)
    assert cmrr(0.0, det) == det.cmrr_ceiling_db
    assert cmrr(1e9, det) == det.cmrr_ceiling_db


def test_clearance_band_limit_default_config():
    freqs = np.linspace(0.0, 6e9, 601)
    report = clearance(0.05, DEFAULT, freqs, threshold_db=12.0)
    assert report.band_limit_hz >= 4e9
    at_4ghz = report.clearance_db[np.searchsorted(freqs, 4e9)]
    assert at_4ghz >= 12.0


def test_clearance_contiguity_rule():
    det = BalancedDetectorConfig(electronic_noise_dbm_hz=-140.0)  # huge floor
    freqs = np.linspace(0.0, 6e9, 61)
    report = clearance(0.05, det, freqs, threshold_db=12.0)
    assert report.band_limit_hz == 0.0
    with pytest.raises(ValueError):
        clearance(0.05, det, np.array([]))


def test_diode_validation():
    with pytest.raises(ValueError):
        PhotodiodeParams(responsivity=-0.1)
    with pytest.raises(ValueError):
        PhotodiodeParams(saturation_current=0.0)
    with pytest.warns(UserWarning, match="unity-QE"):
        PhotodiodeParams(responsivity=1.4)
    with pytest.raises(ValueError):
        BalancedDetectorConfig(balance_mismatch=1.5)


def test_psd_csv_formats_db_columns(tmp_path):
    path = tmp_path / "spectrum.csv"
    freqs = np.array([0.0, 1e9])
    save_psd_csv(
        path,
        freqs,
        {"power_w_hz": np.array([1.234567890123e-20, 2e-20]),
         "clearance_db": np.array([13.123456789, 12.0])},
    )
    lines = path.read_text().splitlines()
    assert lines[0] == "frequency_hz,power_w_hz,clearance_db"
    first = lines[1].split(",")
    assert first[1] == "1.23456789012e-20"  # 12 significant digits
    assert first[2] == "13.1235"  # 6 significant digits
