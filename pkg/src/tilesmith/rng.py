"""Deterministic 64-bit PRNG used by every generator in the engine.

The generator is a splitmix64 stream: state advances by a fixed odd
constant (GAMMA) and each output is the finalizer-mixed state.  The same
constants produce the same bit stream in any language, which is what makes
grids reproducible across implementations.  All arithmetic is modulo 2**64.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
# Second mixing constant, used only for per-step seed derivation.
SPLIT_SALT = 0xC2B2AE3D27D4EB4F

_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Deterministic child seed for step `index` under `master`.

    Defined as mix64(master + (index + 1) * SPLIT_SALT) so that distinct
    step indices give decorrelated streams without consuming the master
    stream itself.
    """
    return mix64((master + ((index + 1) * SPLIT_SALT)) & MASK64)


class SplitMix64:
    """Sequential form of the stream; one instance per generation call."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform in [0, 1), 53-bit resolution."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via multiply-shift (no rejection)."""
        return (self.next_u64() * n) >> 64


def u64_stream(seed: int, count: int) -> np.ndarray:
    """Vectorized outputs 0..count-1 of the stream started at `seed`.

    Output i equals mix64(seed + (i + 1) * GAMMA), identical to calling
    SplitMix64(seed).next_u64() `count` times.
    """
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + idx * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def float_stream(seed: int, count: int) -> np.ndarray:
    """Vectorized counterpart of next_float()."""
    return (u64_stream(seed, count) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def hash_cell(seed: int, octave: int, ix: int, iy: int) -> int:
    """Stable lattice-point hash for value noise (scalar form)."""
    h = mix64(seed ^ ((ix * GAMMA) & MASK64))
    h = mix64(h ^ ((iy * SPLIT_SALT) & MASK64))
    return mix64(h ^ octave)
