"""Balanced-detection statistics of the interferometer difference current.

The difference of the two detector photocurrents, evaluated semiclassically
with a strong local oscillator ``E_LO = eps_r + i*eps_i`` on the main input
and a weak field ``x + i*y`` on the open port, always separates into four
terms:

    j = c_sum  * (I_LO + x^2 + y^2)
      + c_diff * (I_LO - x^2 - y^2)
      + c_x    * (eps_r * x + eps_i * y)
      + c_y    * (eps_r * y - eps_i * x)

with ``I_LO = eps_r^2 + eps_i^2``.  The coefficients depend only on the
interferometer setting.  :func:`coefficients_from_transfer` extracts them
from any transfer matrix; :func:`general_coefficients` and
:func:`lossy_coefficients` are the closed forms for the lossless and the
balanced-input lossy family.  The decomposition is algebraically identical
to propagating the fields and subtracting the two output powers, and the
tests hold both routes against each other sample by sample.

Sign conventions are fixed by that propagation route.  In particular the
intensity-null phase of :func:`balance_phase` satisfies

    cos(phi*) = -(eta1^2 - eta2^2) / (2 * eta1 * eta2) * cot(2 * alpha2)

with the root taken nearest pi/2; at phi* the term proportional to I_LO
vanishes identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
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
]


class UnbalanceableError(ValueError):
    """No phase can null the intensity term for this loss/splitter setting."""


class DegenerateConfigError(ValueError):
    """The balance condition is undefined (zero fringe or dead arm)."""


@dataclass(frozen=True)
class LocalOscillator:
    """Strong coherent field on the main input, eps_r + i*eps_i.

    Amplitudes are in square-root intensity units; ``intensity`` is the
    photon-flux-like scale that shot-level noise terms are proportional to.
    """

    eps_real: float
    eps_imag: float = 0.0

    @property
    def intensity(self) -> float:
        return self.eps_real * self.eps_real + self.eps_imag * self.eps_imag


@dataclass(frozen=True)
class QuadratureSample:
    """One draw (or an array of draws) of the open-port quadratures."""

    x: float | np.ndarray
    y: float | np.ndarray


@dataclass(frozen=True)
class DifferenceCurrentCoefficients:
    """Coefficients of the four-term difference-current decomposition.

    ``c_x`` multiplies (eps_r*x + eps_i*y) and ``c_y`` multiplies
    (eps_r*y - eps_i*x); with a real local oscillator these are simply the
    gains of eps_r*x and eps_r*y.
    """

    c_sum: float
    c_diff: float
    c_x: float
    c_y: float


def general_coefficients(
    alpha1: float, alpha2: float, phi: float
) -> DifferenceCurrentCoefficients:
    """Closed-form coefficients for the lossless interferometer.

    Written in the sum/difference-angle form with a_minus = 2*(alpha1 -
    alpha2) and a_plus = 2*(alpha1 + alpha2):

        c_sum  = 0
        c_diff = cos^2(phi/2) * cos(a_minus) + sin^2(phi/2) * cos(a_plus)
        c_x    = 2 * [cos^2(phi/2) * sin(a_minus) + sin^2(phi/2) * sin(a_plus)]
        c_y    = -2 * sin(phi) * sin(2*alpha2)

    At alpha1 = alpha2 = pi/4 this reduces to c_diff = cos(phi),
    c_y = -2*sin(phi), c_x = 0: pure phase-quadrature readout at phi = pi/2.
    """
    a_minus = 2.0 * (alpha1 - alpha2)
    a_plus = 2.0 * (alpha1 + alpha2)
    cos_half_sq = math.cos(0.5 * phi) ** 2
    sin_half_sq = math.sin(0.5 * phi) ** 2
    c_diff = cos_half_sq * math.cos(a_minus) + sin_half_sq * math.cos(a_plus)
    c_x = 2.0 * (cos_half_sq * math.sin(a_minus) + sin_half_sq * math.sin(a_plus))
    c_y = -2.0 * math.sin(phi) * math.sin(2.0 * alpha2)
    return DifferenceCurrentCoefficients(0.0, c_diff, c_x, c_y)


def lossy_coefficients(
    alpha2: float, phi: float, eta1: float, eta2: float
) -> DifferenceCurrentCoefficients:
    """Closed-form coefficients for a balanced input splitter with arm losses.

    Assumes alpha1 = pi/4.  Unequal transmissions couple the summed
    intensity into the difference current:

        c_sum  = 0.5 * cos(2*alpha2) * (eta1^2 - eta2^2)
        c_diff = eta1 * eta2 * sin(2*alpha2) * cos(phi)
        c_x    = cos(2*alpha2) * (eta1^2 + eta2^2)
        c_y    = -2 * eta1 * eta2 * sin(2*alpha2) * sin(phi)
    """
    cos2 = math.cos(2.0 * alpha2)
    sin2 = math.sin(2.0 * alpha2)
    c_sum = 0.5 * cos2 * (eta1 * eta1 - eta2 * eta2)
    c_diff = eta1 * eta2 * sin2 * math.cos(phi)
    c_x = cos2 * (eta1 * eta1 + eta2 * eta2)
    c_y = -2.0 * eta1 * eta2 * sin2 * math.sin(phi)
    return DifferenceCurrentCoefficients(c_sum, c_diff, c_x, c_y)


def coefficients_from_transfer(u: np.ndarray) -> DifferenceCurrentCoefficients:
    """Extract the decomposition coefficients from any 2x2 transfer matrix.

    Works for arbitrary splitter angles and losses; the closed forms above
    are special cases of this bridge.
    """
    lo_gain = abs(u[0, 0]) ** 2 - abs(u[1, 0]) ** 2
    vac_gain = abs(u[0, 1]) ** 2 - abs(u[1, 1]) ** 2
    cross = u[0, 0] * np.conj(u[0, 1]) - u[1, 0] * np.conj(u[1, 1])
    return DifferenceCurrentCoefficients(
        c_sum=float(0.5 * (lo_gain + vac_gain)),
        c_diff=float(0.5 * (lo_gain - vac_gain)),
        c_x=float(2.0 * cross.real),
        c_y=float(2.0 * cross.imag),
    )


def _evaluate(
    coeffs: DifferenceCurrentCoefficients,
    eps_r: float | np.ndarray,
    eps_i: float | np.ndarray,
    intensity: float | np.ndarray,
    x: float | np.ndarray,
    y: float | np.ndarray,
):
    quad = x * x + y * y
    return (
        coeffs.c_sum * (intensity + quad)
        + coeffs.c_diff * (intensity - quad)
        + coeffs.c_x * (eps_r * x + eps_i * y)
        + coeffs.c_y * (eps_r * y - eps_i * x)
    )


def difference_current(
    coeffs: DifferenceCurrentCoefficients,
    lo: LocalOscillator,
    sample: QuadratureSample,
):
    """Evaluate the difference current for one LO setting and sample(s).

    Accepts scalar or array quadratures and broadcasts accordingly.
    """
    return _evaluate(coeffs, lo.eps_real, lo.eps_imag, lo.intensity, sample.x, sample.y)


def balance_phase(alpha2: float, eta1: float, eta2: float) -> float:
    """Phase that nulls the intensity-proportional part of the current.

    Solves c_sum + c_diff(phi) = 0 for the balanced-input lossy family and
    returns the root nearest pi/2 (exactly pi/2 when the losses are equal).

    Raises:
        DegenerateConfigError: sin(2*alpha2) = 0 or a dead arm, so no fringe
            exists to balance against.
        UnbalanceableError: the loss asymmetry exceeds the fringe amplitude
            and no phase can null the intensity term.
    """
    sin2 = math.sin(2.0 * alpha2)
    # abs() guard: sin(2*alpha2) only underflows near multiples of pi/2,
    # where round-off leaves ~1e-16 instead of an exact zero
    if abs(sin2) < 1e-12 or eta1 == 0.0 or eta2 == 0.0:
        raise DegenerateConfigError(
            "balance condition undefined: zero fringe amplitude "
            f"(sin(2*alpha2)={sin2}, eta1={eta1}, eta2={eta2})"
        )
    cos2 = math.cos(2.0 * alpha2)
    rhs = -(eta1 * eta1 - eta2 * eta2) * cos2 / (2.0 * eta1 * eta2 * sin2)
    if abs(rhs) > 1.0:
        raise UnbalanceableError(
            f"required cos(phi*) = {rhs:.6g} lies outside [-1, 1]"
        )
    return math.acos(rhs)


def analytic_moments(
    coeffs: DifferenceCurrentCoefficients,
    lo: LocalOscillator,
    sigma2: float,
) -> tuple[float, float]:
    """Mean and variance of the difference current for Gaussian quadratures.

    ``x`` and ``y`` are independent N(0, sigma2) draws.  Using
    E[x^2 + y^2] = 2*sigma2 and Var[x^2 + y^2] = 4*sigma2^2:

        mean = (c_sum + c_diff) * I_LO + (c_sum - c_diff) * 2 * sigma2
        var  = (c_x^2 + c_y^2) * I_LO * sigma2
             + (c_sum - c_diff)^2 * 4 * sigma2^2

    The linear-gain term uses I_LO = eps_r^2 + eps_i^2, which reduces to
    the eps_r^2 form when the oscillator is real.

    Raises:
        ValueError: sigma2 < 0.
    """
    if sigma2 < 0.0:
        raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
    intensity = lo.intensity
    mean = (coeffs.c_sum + coeffs.c_diff) * intensity
    mean += (coeffs.c_sum - coeffs.c_diff) * 2.0 * sigma2
    gain_sq = coeffs.c_x * coeffs.c_x + coeffs.c_y * coeffs.c_y
    variance = gain_sq * intensity * sigma2
    variance += (coeffs.c_sum - coeffs.c_diff) ** 2 * 4.0 * sigma2 * sigma2
    return mean, variance
