"""Deterministic pseudo-randomness.

A splitmix64 sequence expands the user seed into the 256-bit state of a
xoshiro256++ stream. Everything is integer arithmetic masked to 64 bits,
so a given seed produces the same draws on every platform and Python
version. Not cryptographic.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# scale factor mapping a 53-bit integer onto [0, 1)
_INV_2_53 = 2.0 ** -53


def _mix64(x: int) -> int:
    """splitmix64 output function: one-shot avalanche of a 64-bit value."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def splitmix64_draws(seed: int, n: int) -> list[int]:
    """First ``n`` outputs of the splitmix64 generator for ``seed``."""
    state = seed & _MASK64
    out = []
    for _ in range(n):
        state = (state + _GOLDEN) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


def derive_seed(base_seed: int, *parts: int | str) -> int:
    """Mix a base seed with context labels into an independent sub-seed.

    Used to hand disjoint streams to independent tasks (for example train
    sampling vs. weight init) so they stay decoupled: changing how one
    stream is consumed never shifts another.
    """
    h = base_seed & _MASK64
    for part in parts:
        key = _fnv1a64(part) if isinstance(part, str) else part & _MASK64
        h = _mix64(h ^ key)
    return h


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Prng:
    """xoshiro256++ stream; single-owner, advance-on-read."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        s = splitmix64_draws(seed, 4)
        self._s0, self._s1, self._s2, self._s3 = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s0 + s3) & _MASK64, 23) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def uniform(self, lo: float, hi: float) -> float:
        """Draw from [lo, hi); hi itself is never returned.

        53-bit mantissa scaling; the clamp guards the rare case where
        rounding of lo + u*(hi - lo) lands exactly on hi.
        """
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("uniform bounds must be finite")
        if lo >= hi:
            raise ValueError(f"uniform requires lo < hi, got [{lo}, {hi})")
        u = (self.next_u64() >> 11) * _INV_2_53
        v = lo + u * (hi - lo)
        if v >= hi:
            v = math.nextafter(hi, lo)
        return v

    def uniform_n(self, n: int, lo: float, hi: float) -> np.ndarray:
        """n independent uniform draws as a float64 vector."""
        return np.array([self.uniform(lo, hi) for _ in range(n)], dtype=np.float64)
