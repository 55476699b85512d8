"""Reproducible randomness: counter-based generators keyed by (seed, stream).

Every stochastic operation in the package takes an explicit RngSeed.  Two
runs with the same (seed, stream) produce identical samples regardless of
scheduling, which keeps parallel sweeps bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
# splitmix64 constants, used to derive statistically independent child streams
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngSeed:
    """Key of a counter-based random stream."""

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))

    def derive(self, index: int) -> "RngSeed":
        """Child seed for sub-task `index`; distinct indices give distinct streams."""
        child = _splitmix64(self.stream ^ _splitmix64(int(index) & _MASK64))
        return RngSeed(self.seed, child)
