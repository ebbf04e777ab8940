"""Proportional-integral feedback that nulls the DC difference current.

The loop actuates the arm phase through a drive voltage,
``phase = start_phase + pi * V / v_pi``, reads back the windowed mean of
the simulated difference current, and steps the voltage until the mean is
within tolerance of zero.  Nothing else crosses the interface: the
controller writes phase and reads averaged current, so the quadrature
statistics of the source are untouched by the loop.

The plant slope d(DC)/d(phase) near the operating point is
-(I_LO - 2*sigma2) * eta1 * eta2 * sin(2*alpha2) * sin(phase).  The step
normalizes the measured error by a slope estimate (finite difference at
startup unless configured), which makes the proportional update a damped
Newton iteration: the error contracts by (1 - gain_p) per step, monotone
for 0 < gain_p <= 1 from starting phases within about pi/4 of the root.
Convergence is declared after ``settle_count`` consecutive in-tolerance
readings; the loop keeps stepping while the streak builds, so a noisy
early pass cannot freeze the phase at the starting point.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from ._seeding import STREAM_CONTROLLER, derive_seed
from .homodyne import (
    DegenerateConfigError,
    LocalOscillator,
    balance_phase,
)
from .interferometer import InterferometerConfig
from .sampling import SamplerConfig, generate_timeseries

__all__ = [
    "ControllerConfig",
    "ControllerState",
    "SimulationEnvironment",
    "measure_dc",
    "step",
    "run_until_balanced",
    "save_trace_csv",
]


@dataclass(frozen=True)
class ControllerConfig:
    """Loop parameters.

    ``tolerance`` is relative: a reading counts as balanced when
    |DC| <= tolerance * I_LO * fringe amplitude.  ``dc_slope`` may pin the
    plant slope d(DC)/d(phase); None lets the loop calibrate it by finite
    difference before the first step.
    """

    v_pi: float = 5.0
    gain_p: float = 0.5
    gain_i: float = 0.1
    dc_window: int = 10_000
    tolerance: float = 1e-3
    max_iterations: int = 200
    start_phase: float = math.pi / 2.0
    v_rail: float = 10.0
    settle_count: int = 2
    dc_slope: float | None = None

    def __post_init__(self) -> None:
        if self.v_pi <= 0.0:
            raise ValueError(f"v_pi must be positive, got {self.v_pi}")
        if self.dc_window < 1:
            raise ValueError(f"dc_window must be >= 1, got {self.dc_window}")
        if self.tolerance <= 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1 or self.settle_count < 1:
            raise ValueError("max_iterations and settle_count must be >= 1")
        if not 0.0 < self.gain_p <= 1.0:
            raise ValueError(f"gain_p must lie in (0, 1], got {self.gain_p}")
        if self.gain_i < 0.0:
            raise ValueError(f"gain_i must be nonnegative, got {self.gain_i}")


@dataclass(frozen=True)
class ControllerState:
    """Loop state after ``iteration`` completed steps."""

    control_voltage: float = 0.0
    phase: float = math.pi / 2.0
    integral_accumulator: float = 0.0
    iteration: int = 0
    converged: bool = False


@dataclass
class SimulationEnvironment:
    """Measurement plant: a static interferometer with a drivable phase.

    Each DC reading simulates a fresh windowed record at the requested
    phase with a seed derived from (seed, controller stream, call index),
    so a full loop run is reproducible from the base seed alone.
    """

    alpha1: float
    alpha2: float
    eta1: float
    eta2: float
    lo: LocalOscillator
    sampler: SamplerConfig
    _calls: int = field(default=0, repr=False)

    def measure_mean(self, phase: float, window: int) -> float:
        config = InterferometerConfig(
            alpha1=self.alpha1, alpha2=self.alpha2, phi=phase,
            eta1=self.eta1, eta2=self.eta2,
        )
        call_seed = derive_seed(self.sampler.seed, STREAM_CONTROLLER, self._calls)
        self._calls += 1
        window_config = replace(self.sampler, n_samples=window, seed=call_seed)
        return float(generate_timeseries(config, self.lo, window_config).samples.mean())

    @property
    def fringe_coefficient(self) -> float:
        """Amplitude of the phase fringe in the intensity coefficient."""
        return self.eta1 * self.eta2 * abs(math.sin(2.0 * self.alpha2))


def measure_dc(env: SimulationEnvironment, state: ControllerState,
               config: ControllerConfig) -> float:
    """Windowed mean of the difference current at the current phase."""
    return env.measure_mean(state.phase, config.dc_window)


def step(state: ControllerState, measured_dc: float,
         config: ControllerConfig) -> ControllerState:
    """One PI update of the drive voltage.

    The correction opposes measured_dc * dc_slope, so a zero reading with
    an empty integrator leaves the voltage unchanged.

    Raises:
        ValueError: config.dc_slope is None (slope not calibrated).
    """
    if config.dc_slope is None:
        raise ValueError("dc_slope is not calibrated; set it or use run_until_balanced")
    if config.dc_slope == 0.0:
        raise DegenerateConfigError("zero plant slope, phase has no effect on DC")
    accumulator = state.integral_accumulator + measured_dc
    dphi = -(config.gain_p * measured_dc + config.gain_i * accumulator) / config.dc_slope
    voltage = state.control_voltage + dphi * config.v_pi / math.pi
    voltage = max(-config.v_rail, min(config.v_rail, voltage))
    return replace(
        state,
        control_voltage=voltage,
        phase=config.start_phase + math.pi * voltage / config.v_pi,
        integral_accumulator=accumulator,
        iteration=state.iteration + 1,
    )


def run_until_balanced(
    env: SimulationEnvironment,
    config: ControllerConfig,
) -> tuple[ControllerState, list[tuple[int, float, float, float]]]:
    """Drive the loop until settled or max_iterations is exhausted.

    Returns the final state (``converged`` reports the outcome; a
    non-convergent run is returned, not raised) and the trace of
    (iteration, voltage, phase, measured DC) rows.

    Raises:
        UnbalanceableError, DegenerateConfigError: no intensity null exists
            for this setting, surfaced before any stepping.
    """
    balance_phase(env.alpha2, env.eta1, env.eta2)  # existence check

    if config.dc_slope is None:
        delta = 0.05
        hi = env.measure_mean(config.start_phase + delta, config.dc_window)
        lo = env.measure_mean(config.start_phase - delta, config.dc_window)
        slope = (hi - lo) / (2.0 * delta)
        if slope == 0.0 or not math.isfinite(slope):
            raise DegenerateConfigError(
                f"calibrated plant slope {slope} is unusable; "
                "is the oscillator off or the fringe degenerate?"
            )
        config = replace(config, dc_slope=slope)

    threshold = config.tolerance * env.lo.intensity * env.fringe_coefficient
    state = ControllerState(phase=config.start_phase)
    trace: list[tuple[int, float, float, float]] = []
    streak = 0
    for _ in range(config.max_iterations):
        dc = measure_dc(env, state, config)
        trace.append((state.iteration, state.control_voltage, state.phase, dc))
        streak = streak + 1 if abs(dc) <= threshold else 0
        if streak >= config.settle_count:
            return replace(state, converged=True), trace
        state = step(state, dc, config)
    return state, trace


def save_trace_csv(path: str | Path,
                   trace: list[tuple[int, float, float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "voltage_v", "phase_rad", "dc_mean"])
        for iteration, voltage, phase, dc in trace:
            writer.writerow([iteration, f"{voltage:.12g}", f"{phase:.12g}", f"{dc:.12g}"])
