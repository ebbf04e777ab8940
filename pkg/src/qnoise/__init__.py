"""Simulation and analysis of a tunable-interferometer quantum noise source.

The package models an electrically tunable two-splitter interferometer
read out by a balanced photodetector pair: the transfer optics, the
statistics of the difference current, stochastic record generation with
oscillator intensity noise, the detection chain (response, electronic
floor, common-mode rejection), a feedback loop that locks the intensity
null, and a digitizer-plus-extractor path that turns records into random
bits.  :mod:`qnoise.pipeline` wires these into complete workflows and
``qnoise`` on the command line drives them from JSON configs.
"""

from .controller import (
    ControllerConfig,
    ControllerState,
    SimulationEnvironment,
    measure_dc,
    run_until_balanced,
    save_trace_csv,
    step,
)
from .detector import (
    BalancedDetectorConfig,
    ClearanceReport,
    PhotodiodeParams,
    apply_detector,
    clearance,
    cmrr,
    save_clearance_csv,
    save_psd_csv,
    shot_noise_psd,
    transfer_function,
    vacuum_to_ampere_scale,
)
from .homodyne import (
    DegenerateConfigError,
    DifferenceCurrentCoefficients,
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
from .interferometer import (
    InterferometerConfig,
    arm_loss_matrix,
    beam_splitter_matrix,
    closed_form_transfer,
    compose_transfer,
    phase_delay_matrix,
    propagate,
    wrap_phase,
)
from .pipeline import (
    BalanceResult,
    FringeScanResult,
    PowerScanResult,
    PsdRunResult,
    QrngResult,
    resolve_phase,
    run_balance,
    run_fringe,
    run_power_scan,
    run_psd,
    run_qrng,
)
from .qrng import (
    AdcConfig,
    BitStream,
    RandomnessReport,
    extract,
    min_entropy,
    quantize,
    randomness_checks,
    unpack_bits,
)
from .sampling import (
    NoiseTimeSeries,
    PsdEstimate,
    SamplerConfig,
    estimate_psd,
    generate_timeseries,
    load_timeseries_binary,
    load_timeseries_csv,
    sample_lo_intensity,
    sample_vacuum,
    save_timeseries_binary,
    save_timeseries_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # optics
    "InterferometerConfig",
    "beam_splitter_matrix",
    "phase_delay_matrix",
    "arm_loss_matrix",
    "compose_transfer",
    "closed_form_transfer",
    "propagate",
    "wrap_phase",
    # difference-current statistics
    "LocalOscillator",
    "QuadratureSample",
    "DifferenceCurrentCoefficients",
    "UnbalanceableError",
    "DegenerateConfigError",
    "general_coefficients",
    "lossy_coefficients",
    "coefficients_from_transfer",
    "difference_current",
    "balance_phase",
    "analytic_moments",
    # records and spectra
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
    # detection chain
    "PhotodiodeParams",
    "BalancedDetectorConfig",
    "ClearanceReport",
    "transfer_function",
    "shot_noise_psd",
    "vacuum_to_ampere_scale",
    "apply_detector",
    "cmrr",
    "clearance",
    "save_psd_csv",
    "save_clearance_csv",
    # feedback
    "ControllerConfig",
    "ControllerState",
    "SimulationEnvironment",
    "measure_dc",
    "step",
    "run_until_balanced",
    "save_trace_csv",
    # bits
    "AdcConfig",
    "BitStream",
    "RandomnessReport",
    "quantize",
    "min_entropy",
    "extract",
    "randomness_checks",
    "unpack_bits",
    # workflows
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
