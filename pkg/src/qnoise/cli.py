"""Command-line front end.

Subcommands
-----------
fringe      analytic phase sweep: mean current, port powers, visibility
balance     feedback lock onto the intensity-null phase
psd         calibrated noise spectra with an oscillator-off reference
power-scan  record variance against oscillator intensity, with fits
qrng        digitize a record and extract random bits

Every run writes ``resolved_config.json`` (the configuration after
defaults and the ``--seed`` override, reusable verbatim with ``--config``)
and ``summary.json`` next to the command's data files in ``--out``.

Exit codes: 0 success; 2 configuration problems (unreadable or invalid
JSON, unknown keys, out-of-range values); 3 balance problems (no
intensity null exists, degenerate fringe, or the loop failed to
converge); 4 numerical failure during simulation.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .controller import ControllerConfig, save_trace_csv
from .detector import BalancedDetectorConfig, PhotodiodeParams, save_psd_csv
from .homodyne import DegenerateConfigError, LocalOscillator, UnbalanceableError
from .interferometer import InterferometerConfig
from .pipeline import (
    resolve_phase,
    run_balance,
    run_fringe,
    run_power_scan,
    run_psd,
    run_qrng,
)
from .qrng import AdcConfig
from .sampling import SamplerConfig, save_timeseries_binary

__all__ = ["ConfigError", "DEFAULT_CONFIG", "load_config", "main"]


class ConfigError(Exception):
    """Configuration file or value rejected before any simulation ran."""


DEFAULT_CONFIG: dict = {
    "seed": 20260815,
    "interferometer": {
        "alpha1_rad": math.pi / 4.0,
        "alpha2_rad": math.pi / 4.0,
        "phi_rad": None,  # null = lock to the intensity-null phase
        "eta1": 1.0,
        "eta2": 1.0,
    },
    "oscillator": {
        "intensity": 1.0e9,
        "sigma2_vac": 0.25,
        "rin_dbhz": None,
        "rin_bandwidth_hz": 1.0e9,
    },
    "sampling": {
        "sample_rate_hz": 1.0e10,
        "n_samples": 1_048_576,
        "n_chunks": 1,
    },
    "detector": {
        "enabled": True,
        "p_opt_w": 0.05,
        "responsivity_a_w": 0.78,
        "dark_current_a": 1.0e-6,
        "saturation_current_a": 0.03,
        "diode_bandwidth_hz": 1.0e10,
        "load_resistance_ohm": 50.0,
        "transfer_cutoff_hz": 4.0e9,
        "transfer_order": 2,
        "electronic_noise_dbm_hz": -168.0,
        "balance_mismatch": 1.0e-3,
        "path_delay_s": 1.2e-11,
        "cmrr_ceiling_db": 120.0,
    },
    "controller": {
        "v_pi_v": 5.0,
        "gain_p": 0.5,
        "gain_i": 0.1,
        "dc_window": 10_000,
        "tolerance": 1.0e-3,
        "max_iterations": 200,
        "start_phase_rad": math.pi / 2.0,
        "v_rail_v": 10.0,
        "settle_count": 2,
    },
    "fringe": {
        "n_points": 721,
    },
    "psd": {
        "segment_length": 4096,
        "window": "hann",
    },
    "power_scan": {
        "intensity_min": 4.0e8,
        "intensity_max": 4.0e9,
        "n_points": 10,
        "n_samples_per_point": 131_072,
    },
    "adc": {
        "bits": 8,
        "full_scale_sigma": 4.0,
    },
    "extractor": {
        "seed": 97,
        "ratio": None,  # null = 90% of the min-entropy bound
        "block_bits": 4096,
    },
}

# Keys whose default is null; a value, when given, must be numeric.
_NULLABLE = {"phi_rad", "rin_dbhz", "electronic_noise_dbm_hz", "ratio"}


def _coerce(path: str, value, default):
    if default is None or path.rsplit(".", 1)[-1] in _NULLABLE:
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number or null, got {value!r}")
        return float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path} must be true or false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{path}: unsupported config field")


def _merge(defaults: dict, user: dict, prefix: str = "") -> dict:
    if not isinstance(user, dict):
        raise ConfigError(f"section {prefix.rstrip('.') or '<root>'} must be a JSON object")
    unknown = sorted(set(user) - set(defaults))
    if unknown:
        names = ", ".join(f"{prefix}{key}" for key in unknown)
        raise ConfigError(f"unknown config key(s): {names}")
    merged: dict = {}
    for key, default in defaults.items():
        if key not in user:
            merged[key] = copy.deepcopy(default)
        elif isinstance(default, dict):
            merged[key] = _merge(default, user[key], f"{prefix}{key}.")
        else:
            merged[key] = _coerce(f"{prefix}{key}", user[key], default)
    return merged


def load_config(path: str | Path | None) -> dict:
    """Read a JSON config, fill defaults, and reject anything unknown.

    The result always carries every key, so writing it back out and
    loading it again is the identity.
    """
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return _merge(DEFAULT_CONFIG, user)


def _build_interferometer(config: dict) -> InterferometerConfig:
    section = config["interferometer"]
    return InterferometerConfig(
        alpha1=section["alpha1_rad"],
        alpha2=section["alpha2_rad"],
        phi=section["phi_rad"] if section["phi_rad"] is not None else 0.0,
        eta1=section["eta1"],
        eta2=section["eta2"],
    )


def _build_oscillator(config: dict) -> LocalOscillator:
    intensity = config["oscillator"]["intensity"]
    if intensity < 0.0:
        raise ConfigError(f"oscillator.intensity must be nonnegative, got {intensity}")
    return LocalOscillator(math.sqrt(intensity))


def _build_sampler(config: dict) -> SamplerConfig:
    osc, samp = config["oscillator"], config["sampling"]
    return SamplerConfig(
        seed=config["seed"],
        sample_rate=samp["sample_rate_hz"],
        n_samples=samp["n_samples"],
        sigma2_vac=osc["sigma2_vac"],
        rin_dbhz=osc["rin_dbhz"],
        rin_bandwidth=osc["rin_bandwidth_hz"],
    )


def _build_detector(config: dict) -> BalancedDetectorConfig | None:
    section = config["detector"]
    if not section["enabled"]:
        return None
    diode = PhotodiodeParams(
        responsivity=section["responsivity_a_w"],
        dark_current=section["dark_current_a"],
        saturation_current=section["saturation_current_a"],
        bandwidth=section["diode_bandwidth_hz"],
    )
    return BalancedDetectorConfig(
        diode_a=diode,
        diode_b=diode,
        load_resistance=section["load_resistance_ohm"],
        transfer_cutoff=section["transfer_cutoff_hz"],
        transfer_order=section["transfer_order"],
        electronic_noise_dbm_hz=section["electronic_noise_dbm_hz"],
        balance_mismatch=section["balance_mismatch"],
        path_delay=section["path_delay_s"],
        cmrr_ceiling_db=section["cmrr_ceiling_db"],
    )


def _build_controller(config: dict) -> ControllerConfig:
    section = config["controller"]
    return ControllerConfig(
        v_pi=section["v_pi_v"],
        gain_p=section["gain_p"],
        gain_i=section["gain_i"],
        dc_window=section["dc_window"],
        tolerance=section["tolerance"],
        max_iterations=section["max_iterations"],
        start_phase=section["start_phase_rad"],
        v_rail=section["v_rail_v"],
        settle_count=section["settle_count"],
    )


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_table(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    length = len(next(iter(columns.values())))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(length):
            writer.writerow([f"{columns[name][i]:.12g}" for name in names])


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


def _dbm_per_hz(psd_w_hz: np.ndarray) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(psd_w_hz, 1e-300) / 1e-3)


def _cmd_fringe(config: dict, out: Path, quiet: bool) -> int:
    result = run_fringe(
        _build_interferometer(config),
        _build_oscillator(config),
        sigma2_vac=config["oscillator"]["sigma2_vac"],
        n_points=config["fringe"]["n_points"],
    )
    _write_table(
        out / "fringe.csv",
        {
            "phase_rad": result.phases,
            "dc_mean": result.dc_mean,
            "port1_power": result.port1_power,
            "port2_power": result.port2_power,
        },
    )
    _write_json(
        out / "summary.json",
        {
            "command": "fringe",
            "visibility": result.visibility,
            "balance_phase_rad": _json_safe(result.balance_phase_rad),
            "n_points": int(result.phases.size),
        },
    )
    _say(quiet, f"visibility {result.visibility:.6f}")
    if math.isfinite(result.balance_phase_rad):
        _say(quiet, f"intensity-null phase {result.balance_phase_rad:.9f} rad")
    else:
        _say(quiet, "no intensity-null phase exists for this setting")
    _say(quiet, f"wrote {out / 'fringe.csv'}")
    return 0


def _cmd_balance(config: dict, out: Path, quiet: bool) -> int:
    result = run_balance(
        _build_interferometer(config),
        _build_oscillator(config),
        _build_sampler(config),
        _build_controller(config),
    )
    save_trace_csv(out / "balance_trace.csv", result.trace)
    _write_json(
        out / "summary.json",
        {
            "command": "balance",
            "converged": result.state.converged,
            "iterations": result.state.iteration,
            "final_voltage_v": result.state.control_voltage,
            "final_phase_rad": result.state.phase,
            "predicted_phase_rad": result.predicted_phase_rad,
            "phase_error_rad": result.phase_error_rad,
            "phase_error_over_pi": result.phase_error_rad / math.pi,
        },
    )
    _say(
        quiet,
        f"{'converged' if result.state.converged else 'did not converge'} "
        f"after {result.state.iteration} iterations; "
        f"phase error {result.phase_error_rad:.3e} rad",
    )
    _say(quiet, f"wrote {out / 'balance_trace.csv'}")
    if not result.state.converged:
        print("balance loop failed to converge within max_iterations", file=sys.stderr)
        return 3
    return 0


def _cmd_psd(config: dict, out: Path, quiet: bool) -> int:
    interferometer = resolve_phase(
        _build_interferometer(config), config["interferometer"]["phi_rad"]
    )
    detector = _build_detector(config)
    result, record = run_psd(
        interferometer,
        _build_oscillator(config),
        _build_sampler(config),
        detector=detector,
        p_opt=config["detector"]["p_opt_w"] if detector is not None else None,
        segment_length=config["psd"]["segment_length"],
        window=config["psd"]["window"],
        n_chunks=config["sampling"]["n_chunks"],
    )
    if detector is None:
        save_psd_csv(out / "psd.csv", result.frequencies, {"psd_sim_hz": result.detected})
    else:
        load = detector.load_resistance
        save_psd_csv(
            out / "psd.csv",
            result.frequencies,
            {
                "detected_a2_hz": result.detected,
                "reference_a2_hz": result.reference,
                "shot_model_w_hz": result.shot_model,
                "detected_dbm_hz": _dbm_per_hz(result.detected * load),
                "reference_dbm_hz": _dbm_per_hz(result.reference * load),
            },
        )
    save_timeseries_binary(out / "record.qnts", record)
    _write_json(
        out / "summary.json",
        {
            "command": "psd",
            "operating_phase_rad": interferometer.phi,
            "kappa_a_per_unit": result.kappa,
            "n_averages": result.n_averages,
            "analytic_white_level": result.analytic_white_level,
            "n_samples": record.n_samples,
        },
    )
    _say(quiet, f"{result.n_averages} averaged segments at phase {interferometer.phi:.6f} rad")
    _say(quiet, f"wrote {out / 'psd.csv'} and {out / 'record.qnts'}")
    return 0


def _cmd_power_scan(config: dict, out: Path, quiet: bool) -> int:
    section = config["power_scan"]
    if not 0.0 < section["intensity_min"] < section["intensity_max"]:
        raise ConfigError("power_scan requires 0 < intensity_min < intensity_max")
    interferometer = resolve_phase(
        _build_interferometer(config), config["interferometer"]["phi_rad"]
    )
    levels = np.linspace(
        section["intensity_min"], section["intensity_max"], section["n_points"]
    )
    result = run_power_scan(
        interferometer,
        _build_sampler(config),
        levels,
        n_samples_per_point=section["n_samples_per_point"],
    )
    fit = result.linear_coef * levels + result.quad_coef * levels**2
    _write_table(
        out / "power_scan.csv",
        {
            "intensity": result.intensities,
            "variance": result.variances,
            "variance_fit": fit,
        },
    )
    _write_json(
        out / "summary.json",
        {
            "command": "power-scan",
            "rin_enabled": result.rin_enabled,
            "linear_coef": result.linear_coef,
            "quad_coef": result.quad_coef,
            "quad_t_stat": _json_safe(result.quad_t_stat),
            "r_squared_linear": result.r_squared_linear,
            "n_points": int(levels.size),
        },
    )
    _say(
        quiet,
        f"linear {result.linear_coef:.6g}, quadratic {result.quad_coef:.6g} "
        f"(t = {result.quad_t_stat:.2f}), linear-fit R^2 = {result.r_squared_linear:.6f}",
    )
    _say(quiet, f"wrote {out / 'power_scan.csv'}")
    return 0


def _cmd_qrng(config: dict, out: Path, quiet: bool) -> int:
    interferometer = resolve_phase(
        _build_interferometer(config), config["interferometer"]["phi_rad"]
    )
    adc = AdcConfig(
        bits=config["adc"]["bits"],
        full_scale_sigma=config["adc"]["full_scale_sigma"],
    )
    extractor = config["extractor"]
    result = run_qrng(
        interferometer,
        _build_oscillator(config),
        _build_sampler(config),
        adc,
        extractor_seed=extractor["seed"],
        ratio=extractor["ratio"],
        block_bits=extractor["block_bits"],
        n_chunks=config["sampling"]["n_chunks"],
    )
    (out / "bits.bin").write_bytes(result.stream.bits.tobytes())
    report = result.report
    _write_json(
        out / "summary.json",
        {
            "command": "qrng",
            "n_bits": result.stream.n_bits,
            "n_raw_samples": result.n_raw_samples,
            "bits_per_sample": adc.bits,
            "min_entropy_per_sample_bits": result.min_entropy_per_sample,
            "extraction_ratio": result.ratio,
            "record_sigma": result.record_sigma,
            "checks": None
            if report is None
            else {
                "monobit_z": report.monobit_z,
                "runs_z": report.runs_z,
                "autocorr_z": report.autocorr_z,
                "threshold": report.threshold,
                "passed": report.passed,
            },
        },
    )
    _say(
        quiet,
        f"{result.stream.n_bits} bits at ratio {result.ratio:.4f} "
        f"(min-entropy {result.min_entropy_per_sample:.4f} bits/sample)",
    )
    if report is None:
        _say(quiet, "statistical battery skipped: fewer than 1e5 bits")
    else:
        verdict = "passed" if report.passed else "FAILED"
        _say(
            quiet,
            f"battery {verdict}: monobit z={report.monobit_z:+.3f}, "
            f"runs z={report.runs_z:+.3f}, autocorr z={report.autocorr_z:+.3f}",
        )
        if not report.passed:
            print("randomness battery failed; inspect summary.json", file=sys.stderr)
    _say(quiet, f"wrote {out / 'bits.bin'}")
    return 0


_COMMANDS = {
    "fringe": _cmd_fringe,
    "balance": _cmd_balance,
    "psd": _cmd_psd,
    "power-scan": _cmd_power_scan,
    "qrng": _cmd_qrng,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnoise",
        description="Tunable-interferometer quantum-noise simulator and bit generator.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON configuration file")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory")
    common.add_argument("--seed", type=int, help="override the base seed")
    common.add_argument("--quiet", action="store_true", help="suppress stdout chatter")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fringe", parents=[common], help="analytic phase sweep and visibility")
    sub.add_parser("balance", parents=[common], help="feedback lock onto the intensity null")
    sub.add_parser("psd", parents=[common], help="calibrated noise spectra")
    sub.add_parser("power-scan", parents=[common], help="noise power against intensity")
    sub.add_parser("qrng", parents=[common], help="generate extracted random bits")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config["seed"] = int(args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "resolved_config.json", config)
        return _COMMANDS[args.command](config, out, args.quiet)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (UnbalanceableError, DegenerateConfigError) as exc:
        print(f"balance error: {exc}", file=sys.stderr)
        return 3
    except FloatingPointError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
