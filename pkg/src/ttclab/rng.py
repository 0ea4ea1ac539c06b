"""Seedable, portable random number generation.

Every stochastic draw in the toolkit goes through :class:`SplitMix64` so that
fixtures are reproducible bit-exactly from a 64-bit seed alone, independent of
platform, process count, or library versions.

The scheme (all arithmetic mod 2**64):

    state    <- state + 0x9E3779B97F4A7C15          (golden-ratio increment)
    z        <- state
    z        <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
    z        <- (z XOR (z >> 27)) * 0x94D049BB133111EB
    output   <- z XOR (z >> 31)

Derived quantities are defined exactly as:

*   ``uniform()``      -- ``(next_u64() >> 11) / 2**53`` in [0, 1).
*   ``randint(a, b)``  -- ``a + next_u64() % (b - a + 1)`` (modulo method).
*   ``gauss(mu, s)``   -- Box-Muller, cosine branch only, from two uniforms.
*   child seeds        -- ``mix(seed XOR (index + 1) * 0x9E3779B97F4A7C15)``
                          where ``mix`` is the finalizer above.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for stream `index`, independent of draws on the parent."""
    return _mix64((seed ^ ((index + 1) * _GAMMA)) & _MASK64)


class SplitMix64:
    """Counter-based 64-bit generator; cheap, splittable, fully documented."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix64(self._state)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) / float(1 << 53)
        return lo + (hi - lo) * u

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def gauss(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        u1 = self.uniform()
        while u1 <= 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def child(self, index: int) -> "SplitMix64":
        """Generator for an independent sub-stream (e.g. one per draw index)."""
        return SplitMix64(derive_seed(self._state, index))

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates using randint."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
