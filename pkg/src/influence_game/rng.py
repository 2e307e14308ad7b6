"""Deterministic random number generation.

All randomness in the simulator flows through xoshiro256**, seeded via
splitmix64. Both generators are fixed 64-bit integer algorithms, so a
(config, seed) pair reproduces the same trajectory on any platform and
Python version. Child seeds are derived by hashing (seed, index) pairs,
which keeps every run/stream statistically independent without any
shared state.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 2^-53, for mapping the top 53 bits of a draw onto [0, 1)
_DOUBLE_UNIT = 1.0 / 9007199254740992.0


def mix64(x: int) -> int:
    """splitmix64 finalizer: a bijective scramble of a 64-bit integer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def child_seed(seed: int, index: int) -> int:
    """Derive the index-th child seed of `seed`.

    Distinct indices give distinct children (mix64 is a bijection), so a
    derivation never reuses a seed within one level.
    """
    return mix64((seed & _MASK64) ^ mix64(index + 1))


def seed_at(seed: int, *indices: int) -> int:
    """Walk a path of child derivations, e.g. seed_at(s, value_idx, run_idx)."""
    s = seed & _MASK64
    for ix in indices:
        s = child_seed(s, ix)
    return s


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """First `count` child seeds of the master, pairwise distinct.

    Prefix-stable: derive_seeds(s, n)[i] == derive_seeds(s, m)[i] for i < min(n, m).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    return [child_seed(master_seed, i) for i in range(count)]


def state_from_seed(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into a xoshiro256** state via splitmix64."""
    state = np.empty(4, dtype=np.uint64)
    x = seed & _MASK64
    for i in range(4):
        x = (x + _GOLDEN) & _MASK64
        state[i] = mix64(x)
    if not state.any():
        state[0] = np.uint64(1)  # all-zero state is the one forbidden point
    return state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with the draw helpers the simulator needs.

    The numba kernel implements the identical algorithm over uint64 arrays;
    tests assert the two produce bit-identical streams.
    """

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        self._s = [int(w) for w in state_from_seed(seed)]

    def state_array(self) -> np.ndarray:
        return np.array(self._s, dtype=np.uint64)

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * _DOUBLE_UNIT

    def randbelow(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (_MASK64 + 1 - n) % n  # == 2**64 mod n
        while True:
            u = self.next_u64()
            if u >= threshold:
                return u % n

    def shuffle(self, values) -> None:
        """In-place Fisher-Yates shuffle of a mutable sequence or 1-d array."""
        for i in range(len(values) - 1, 0, -1):
            j = self.randbelow(i + 1)
            values[i], values[j] = values[j], values[i]
