"""SplitMix64: a 64-bit-state generator that any language can reproduce bit for bit.

Used for every randomised potential and forcing so that a seed pins the
physical input regardless of NumPy version or platform.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float, size: int | None = None):
        if size is None:
            return lo + (hi - lo) * self.random()
        return np.array([lo + (hi - lo) * self.random() for _ in range(size)])



def stream(seed: int, *keys: int) -> SplitMix64:
    """Generator for ``(seed, key1, key2, ...)``, independent of call order."""
    state = int(seed) & _MASK
    for key in keys:
        state = SplitMix64(state ^ ((int(key) * _GOLDEN) & _MASK)).next_u64()
    return SplitMix64(state)
