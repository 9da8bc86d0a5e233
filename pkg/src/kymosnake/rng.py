"""Deterministic pseudo-random streams.

All randomized output in this package (run-length jitter, pixel noise) is
drawn from SplitMix64 so that a given seed produces byte-identical results
on every platform and Python build.  The algorithm is pinned here:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    z <- (z xor (z >> 27)) * 0x94D049BB133111EB   mod 2^64
    output z xor (z >> 31)

Independent streams are derived from a user seed with `derive(seed, index)`
so e.g. jitter draws and noise draws never share state.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The SplitMix64 output scramble of a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive(seed: int, stream: int) -> int:
    """Seed for an independent sub-stream of `seed` (stream = 0, 1, 2, ...)."""
    return mix64((seed + (stream + 1) * _GOLDEN) & _MASK)


class SplitMix64:
    """Minimal deterministic 64-bit generator; single-owner, not thread-safe."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return mix64(self._state)

    def below(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def unit(self) -> float:
        """Uniform float in [0, 1) with 53 significant bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)
