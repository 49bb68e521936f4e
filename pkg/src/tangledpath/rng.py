"""Deterministic counter-based random numbers (SplitMix64).

Everything stochastic in this package flows through the SplitMix64 finalizer

    mix64(z):  z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27;  z *= 0x94D049BB133111EB
               z ^= z >> 31

applied to the counter sequence ``seed + i * GOLDEN`` (i = 1, 2, ...), which is
exactly the output stream of the public-domain splitmix64.c generator.  Because
output i is a pure function of (seed, i), any slice of the stream can be
produced independently and in vectorized form, which is what makes sweep
results independent of thread count.

Sub-streams (one per Monte Carlo trial) come from :func:`derive`, which chains
two mix64 rounds per path component:

    s_{j+1} = mix64( (s_j XOR mix64((p_j + 1) * GOLDEN)) + GOLDEN )

so ``derive(master, cell, trial)`` gives a well-separated 64-bit seed for every
(cell, trial) pair.

Reference outputs for seed 0 (first three 64-bit words, matching the published
splitmix64.c test vector) are frozen in the test suite:

    0xE220A8397B1DCDAF  0x6E789E6AA1B965F4  0x06C45D188009454F
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB

_U53 = float(2.0**-53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int, reduced mod 2**64."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _MULT2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` on a uint64 array (multiplication wraps)."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MULT1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MULT2)
    z ^= z >> np.uint64(31)
    return z


def derive(seed: int, *path: int) -> int:
    """Derive a sub-stream seed from ``seed`` and a tuple of nonnegative indices."""
    s = seed & MASK64
    for part in path:
        s = mix64(((s ^ mix64(((part & MASK64) + 1) * GOLDEN)) + GOLDEN) & MASK64)
    return s


def derive_array(seed: int, parts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`derive` over the final path component.

    ``derive_array(s, np.arange(t))[i] == derive(s, i)`` for every i.
    """
    p = parts.astype(np.uint64, copy=False)
    inner = mix64_array((p + np.uint64(1)) * np.uint64(GOLDEN & MASK64))
    s = np.uint64(seed & MASK64)
    return mix64_array((s ^ inner) + np.uint64(GOLDEN))


def stream_u64(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start+1 .. start+count`` of the SplitMix64 stream for ``seed``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    counters = np.uint64(seed & MASK64) + idx * np.uint64(GOLDEN)
    return mix64_array(counters)


def uniform_matrix(seeds: np.ndarray, ncols: int) -> np.ndarray:
    """Row r holds the first ``ncols`` uniforms in [0, 1) of stream ``seeds[r]``."""
    s = seeds.astype(np.uint64, copy=False)
    idx = np.arange(1, ncols + 1, dtype=np.uint64)
    counters = s[:, None] + idx[None, :] * np.uint64(GOLDEN)
    words = mix64_array(counters)
    return (words >> np.uint64(11)).astype(np.float64) * _U53


class SplitMix64:
    """A sequential view of the counter stream, for scalar sampling paths.

    The i-th call to :meth:`next_u64` returns ``mix64(seed + i * GOLDEN)``, so a
    stream can be reproduced either by replaying calls or by jumping straight to
    a counter with :func:`stream_u64`.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int) -> None:
        self.seed = seed & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.seed + self.counter * GOLDEN) & MASK64)

    def uniform(self) -> float:
        """Next double in [0, 1), using the top 53 bits of the next word."""
        return (self.next_u64() >> 11) * _U53

    def uniforms(self, count: int) -> np.ndarray:
        """Vectorized batch of the next ``count`` uniforms (advances the stream)."""
        out = stream_u64(self.seed, self.counter, count)
        self.counter += count
        return (out >> np.uint64(11)).astype(np.float64) * _U53
