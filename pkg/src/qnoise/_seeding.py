"""Deterministic RNG derivation shared by the simulation modules.

Every stochastic stage draws from a PCG64 generator seeded by a
``SeedSequence`` built from ``(base_seed, stream, chunk)``.  The stream
ids below are part of the reproducibility contract: the same base seed,
stream and chunk layout always produce bit-identical sample streams
(numpy keeps Generator output stable for a fixed version, and the
derivation itself is version independent).
"""

from __future__ import annotations

import numpy as np

# Stream ids. Extending the list is fine, reordering is not.
STREAM_VACUUM = 1
STREAM_RIN = 2
STREAM_ELECTRONIC = 3
STREAM_CONTROLLER = 4
STREAM_SCAN = 5


def derive_rng(base_seed: int, stream: int, chunk: int = 0) -> np.random.Generator:
    """Generator for one (seed, stream, chunk) cell of the derivation grid."""
    seq = np.random.SeedSequence((int(base_seed), int(stream), int(chunk)))
    return np.random.default_rng(seq)


def derive_seed(base_seed: int, stream: int, chunk: int = 0) -> int:
    """A 64-bit child seed for the same cell, for APIs that take plain ints."""
    seq = np.random.SeedSequence((int(base_seed), int(stream), int(chunk)))
    return int(seq.generate_state(1, np.uint64)[0])
