"""Transfer matrices for a two-splitter interferometer with a tunable arm pair.

The device is a pair of beam splitters connected by two arms that carry a
relative phase delay and, optionally, unequal amplitude losses.  Everything
is expressed as 2x2 complex matrices acting on the column vector
``(E_in, E_open)`` of the strong input field and the field entering the
otherwise unused port.

Conventions
-----------
* A splitter angle ``alpha`` fixes amplitude transmission ``t = cos(alpha)``
  and reflection ``r = sin(alpha)``, so ``t**2 + r**2 = 1`` identically and
  ``alpha = pi/4`` is the balanced 50/50 point.
* The arm phase ``phi`` is applied symmetrically,
  ``diag(exp(i*phi/2), exp(-i*phi/2))``.
* Arm losses are amplitude transmissions ``eta1, eta2`` in [0, 1] inserted
  between the phase stage and the output splitter.  With ``eta < 1`` the
  matrix is subunitary; the discarded field is not tracked.
* Angles are accepted as raw radians.  Use :func:`wrap_phase` when a value
  should be reported in the principal range (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InterferometerConfig",
    "beam_splitter_matrix",
    "phase_delay_matrix",
    "arm_loss_matrix",
    "compose_transfer",
    "closed_form_transfer",
    "propagate",
    "wrap_phase",
]


@dataclass(frozen=True)
class InterferometerConfig:
    """Static description of one interferometer setting.

    Args:
        alpha1: input splitter angle, radians.
        alpha2: output splitter angle, radians.
        phi: relative arm phase, radians (raw, not wrapped).
        eta1: amplitude transmission of arm 1, in [0, 1].
        eta2: amplitude transmission of arm 2, in [0, 1].
    """

    alpha1: float
    alpha2: float
    phi: float
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self) -> None:
        for name in ("eta1", "eta2"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {eta}")


def beam_splitter_matrix(alpha: float) -> np.ndarray:
    """Real symmetric splitter matrix [[t, r], [r, -t]] with t=cos, r=sin.

    The matrix is orthogonal and its own inverse (a reflection), so two
    identical splitters in sequence give the identity.
    """
    t = math.cos(alpha)
    r = math.sin(alpha)
    return np.array([[t, r], [r, -t]], dtype=complex)


def phase_delay_matrix(phi: float) -> np.ndarray:
    """Unit-determinant diagonal phase stage diag(e^{i phi/2}, e^{-i phi/2})."""
    half = 0.5 * phi
    return np.array(
        [[complex(math.cos(half), math.sin(half)), 0.0],
         [0.0, complex(math.cos(half), -math.sin(half))]],
        dtype=complex,
    )


def arm_loss_matrix(eta1: float, eta2: float) -> np.ndarray:
    """Diagonal amplitude-loss stage diag(eta1, eta2).

    Raises:
        ValueError: if either transmission lies outside [0, 1].
    """
    for name, eta in (("eta1", eta1), ("eta2", eta2)):
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {eta}")
    return np.array([[eta1, 0.0], [0.0, eta2]], dtype=complex)


def compose_transfer(config: InterferometerConfig) -> np.ndarray:
    """Full transfer matrix: output splitter * losses * phase * input splitter.

    Lossless settings give a unitary result; losses make it subunitary
    (singular values <= 1).
    """
    return (
        beam_splitter_matrix(config.alpha2)
        @ arm_loss_matrix(config.eta1, config.eta2)
        @ phase_delay_matrix(config.phi)
        @ beam_splitter_matrix(config.alpha1)
    )


def closed_form_transfer(alpha1: float, alpha2: float, phi: float) -> np.ndarray:
    """Lossless transfer matrix written out element by element.

    Provided as an independent route to the same result as
    :func:`compose_transfer`; the two agree to floating-point accuracy and
    the tests hold them against each other.
    """
    c1, s1 = math.cos(alpha1), math.sin(alpha1)
    c2, s2 = math.cos(alpha2), math.sin(alpha2)
    p = complex(math.cos(0.5 * phi), math.sin(0.5 * phi))
    em = complex(math.cos(phi), -math.sin(phi))
    ep = em.conjugate()
    return np.array(
        [
            [p * (c1 * c2 + em * s1 * s2), p * (s1 * c2 - em * c1 * s2)],
            [p * (c1 * s2 - em * s1 * c2), p.conjugate() * (c1 * c2 + ep * s1 * s2)],
        ],
        dtype=complex,
    )


def propagate(
    u: np.ndarray,
    lo_amplitude: complex,
    vac_amplitude: complex | np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Apply a transfer matrix to the (strong, open-port) field pair.

    ``vac_amplitude`` may be an array of samples; the result broadcasts, so
    the pair of outputs has the same shape as the input samples.

    Returns:
        (out1, out2) complex output amplitudes at the two detector ports.
    """
    out1 = u[0, 0] * lo_amplitude + u[0, 1] * vac_amplitude
    out2 = u[1, 0] * lo_amplitude + u[1, 1] * vac_amplitude
    return np.asarray(out1), np.asarray(out2)


def wrap_phase(phi: float) -> float:
    """Reduce a phase to the principal range (-pi, pi].

    Only used for reporting; the matrix builders accept raw values.
    """
    wrapped = math.remainder(phi, math.tau)
    if wrapped <= -math.pi:
        wrapped = math.pi
    return wrapped
