"""Deterministic random number generation.

The generator is xoshiro256++ seeded via SplitMix64. Both a scalar
(pure Python int) and a vectorized (numpy uint64 array) stepper are
provided; they implement the identical recurrence so a batch of
lockstep streams reproduces the scalar streams bit for bit.

Per-repetition seeds come from ``derive_seed``, a SplitMix64 mix of
``base_seed XOR rep_index``. The mix is a bijection on 64-bit ints,
so distinct repetition indices always get distinct seeds.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64_mix(x: int) -> int:
    """SplitMix64 output function (finalizer) on a 64-bit state."""
    x = (x + GOLDEN_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, rep_index: int) -> int:
    """Per-repetition seed: SplitMix64 mix of base_seed XOR rep_index.

    Injective in rep_index for a fixed base (XOR then a bijective mix),
    so repetitions never share a stream.
    """
    if rep_index < 0:
        raise ValueError(f"rep_index must be >= 0, got {rep_index}")
    return _splitmix64_mix((base_seed ^ rep_index) & MASK64)


def seed_state(seed: int) -> tuple[int, int, int, int]:
    """Expand a 64-bit seed into a xoshiro256++ state via SplitMix64."""
    s = seed & MASK64
    out = []
    for _ in range(4):
        s = (s + GOLDEN_GAMMA) & MASK64
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return tuple(out)


class Xoshiro256PP:
    """Scalar xoshiro256++ stream.

    uniform() maps the top 53 bits of next_uint64() to [0, 1), the
    standard (x >> 11) * 2^-53 construction.
    """

    def __init__(self, seed: int):
        self.s0, self.s1, self.s2, self.s3 = seed_state(seed)

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s0 + s3) & MASK64
        out = (((x << 23) | (x >> 41)) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return out

    def uniform(self) -> float:
        return (self.next_uint64() >> 11) * 2.0**-53


# numpy uint64 constants for the vector path; mixing python ints into
# uint64 array ops would trigger unwanted dtype promotion.
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U41 = np.uint64(41)
_U45 = np.uint64(45)
_U19 = np.uint64(19)
_U11 = np.uint64(11)
_SCALE53 = 2.0**-53


def seed_state_vector(seeds: np.ndarray) -> list[np.ndarray]:
    """Vectorized seed_state: four uint64 arrays, one lane per seed."""
    s = seeds.astype(np.uint64, copy=True)
    gamma = np.uint64(GOLDEN_GAMMA)
    c1 = np.uint64(0xBF58476D1CE4E5B9)
    c2 = np.uint64(0x94D049BB133111EB)
    out = []
    for _ in range(4):
        s = s + gamma
        z = s.copy()
        z = (z ^ (z >> np.uint64(30))) * c1
        z = (z ^ (z >> np.uint64(27))) * c2
        out.append(z ^ (z >> np.uint64(31)))
    return out


def next_uniform_vector(state: list[np.ndarray]) -> np.ndarray:
    """Advance every lane one step, return its uniform in [0, 1).

    Mutates ``state`` in place. Matches Xoshiro256PP.uniform() lane by
    lane when the lane was seeded with the same 64-bit seed.
    """
    s0, s1, s2, s3 = state
    x = s0 + s3
    out = ((x << _U23) | (x >> _U41)) + s0
    t = s1 << _U17
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << _U45) | (s3 >> _U19)
    state[0], state[1], state[2], state[3] = s0, s1, s2, s3
    return (out >> _U11) * _SCALE53
