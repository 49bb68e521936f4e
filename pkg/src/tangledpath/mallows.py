"""Mallows-distributed permutations and their insertion-process construction.

The q-Mallows measure on S_n weights a permutation sigma by q^inv(sigma) and
normalizes by the partition function Z_{n,q} = prod_{i=1..n} (1 + q + ... +
q^{i-1}).  This module builds Mallows samples constructively: independent
truncated-geometric positions v_1, ..., v_n (v_i between 1 and i) drive an
insertion process in which value i is placed at position v_i from the left,
shifting later entries right.  The process output r_n read right-to-left is
Mallows distributed, i.e. reverse(r_n) ~ mu_{n,q}.

Conventions used throughout:

* permutations are 1-based images: ``Permutation((3, 1, 2))`` maps 1 -> 3;
* q = 0 degenerates to the point mass at the identity (every v_i = 1, the
  process output is the decreasing permutation);
* q = 1 is the uniform measure on S_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _iter_product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapabilityError
from .rng import SplitMix64, derive_array, uniform_matrix

ENUMERATION_CAP = 9


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..n} stored as its image sequence."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        img = tuple(int(x) for x in self.image)
        object.__setattr__(self, "image", img)
        if sorted(img) != list(range(1, len(img) + 1)):
            raise ValueError(f"not a permutation of 1..{len(img)}: {img}")

    @property
    def n(self) -> int:
        return len(self.image)

    def __len__(self) -> int:
        return len(self.image)

    def at(self, i: int) -> int:
        """Image of i (1-based)."""
        return self.image[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for pos, val in enumerate(self.image, 1):
            inv[val - 1] = pos
        return Permutation(tuple(inv))


@dataclass(frozen=True)
class InsertionTrace:
    """The insertion positions (v_1, ..., v_n) that drive the process.

    Position i is 1-based and must satisfy 1 <= v_i <= i; violating that is a
    hard error, not a clamp.  ``seed`` records the integer seed the trace was
    sampled from, when one was supplied.
    """

    positions: tuple[int, ...]
    q: float
    seed: int | None = None

    def __post_init__(self) -> None:
        pos = tuple(int(v) for v in self.positions)
        object.__setattr__(self, "positions", pos)
        for i, v in enumerate(pos, 1):
            if not 1 <= v <= i:
                raise ValueError(f"position v_{i}={v} outside [1, {i}]")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q={self.q} outside [0, 1]")

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class TruncatedGeometric:
    """The law of a single insertion position: P(j) = (1-q) q^(j-1) / (1-q^n).

    q = 1 is the uniform law on {1..n}; q = 0 is the point mass at 1.
    """

    n: int
    q: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q={self.q} outside [0, 1]")

    def pmf(self, j: int) -> float:
        if not 1 <= j <= self.n:
            return 0.0
        if self.q == 1.0:
            return 1.0 / self.n
        if self.q == 0.0:
            return 1.0 if j == 1 else 0.0
        denom = -math.expm1(self.n * math.log(self.q))
        return (1.0 - self.q) * self.q ** (j - 1) / denom

    def tail(self, x: int) -> float:
        """P(v >= x)."""
        if x <= 1:
            return 1.0
        if x > self.n:
            return 0.0
        if self.q == 1.0:
            return (self.n - x + 1) / self.n
        if self.q == 0.0:
            return 0.0
        logq = math.log(self.q)
        denom = -math.expm1(self.n * logq)
        return self.q ** (x - 1) * (-math.expm1((self.n - x + 1) * logq)) / denom

    def pmf_vector(self) -> np.ndarray:
        return np.array([self.pmf(j) for j in range(1, self.n + 1)])


def tg_pmf(dist: TruncatedGeometric, j: int) -> float:
    return dist.pmf(j)


def tg_tail(dist: TruncatedGeometric, x: int) -> float:
    return dist.tail(x)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _positions_from_uniforms(u: np.ndarray, q: float) -> np.ndarray:
    """Inverse-CDF transform, one column per index i = 1..n.

    u has shape (m, n); column i-1 is mapped through the truncated geometric
    on {1..i}.  Runs in one vectorized pass; the floor result is clamped into
    [1, i] to absorb end-of-interval rounding.
    """
    m, n = u.shape
    i_grid = np.arange(1, n + 1, dtype=np.float64)
    if q == 1.0:
        v = np.floor(u * i_grid[None, :]).astype(np.int64) + 1
    elif q == 0.0:
        return np.ones((m, n), dtype=np.int64)
    else:
        logq = math.log(q)
        c = -np.expm1(i_grid * logq)  # 1 - q^i, accurately
        v = 1 + np.floor(np.log1p(-u * c[None, :]) / logq).astype(np.int64)
    np.clip(v, 1, np.arange(1, n + 1, dtype=np.int64)[None, :], out=v)
    return v


def sample_trace_matrix(n: int, q: float, seeds: np.ndarray) -> np.ndarray:
    """One trace per seed, as an (len(seeds), n) int64 matrix of positions."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    return _positions_from_uniforms(uniform_matrix(np.asarray(seeds), n), q)


def sample_trace(n: int, q: float, rng: int | SplitMix64) -> InsertionTrace:
    """Draw (v_1, ..., v_n) with independent truncated-geometric components.

    ``rng`` may be an integer seed (a fresh stream is opened and the seed is
    recorded on the trace) or an already-running :class:`SplitMix64` stream.
    The same (n, q, seed) always yields the same trace.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    if isinstance(rng, SplitMix64):
        stream, seed_rec = rng, None
    else:
        stream, seed_rec = SplitMix64(rng), int(rng)
    u = stream.uniforms(n)[None, :]
    v = _positions_from_uniforms(u, q)[0]
    return InsertionTrace(tuple(int(x) for x in v), q, seed_rec)


def mallows_process(trace: InsertionTrace | Sequence[int]) -> Permutation:
    """Run the insertion process: value i enters at position v_i from the left.

    Earlier entries at positions >= v_i shift right.  The all-ones trace gives
    the decreasing permutation; the trace (1, 2, 1, 3, 2, 5) gives
    (3, 5, 1, 4, 6, 2).
    """
    positions = trace.positions if isinstance(trace, InsertionTrace) else trace
    out: list[int] = []
    for i, v in enumerate(positions, 1):
        if not 1 <= v <= i:
            raise ValueError(f"position v_{i}={v} outside [1, {i}]")
        out.insert(v - 1, i)
    return Permutation(tuple(out))


def sample_mallows(
    n: int, q: float, rng: int | SplitMix64
) -> tuple[InsertionTrace, Permutation]:
    """Sample a trace and its process output r_n.

    Note the returned permutation is r_n itself, whose *reverse* is Mallows
    distributed (Law(reverse(r_n)) = mu_{n,q}); apply :func:`reverse` when a
    mu_{n,q} sample is wanted.  r_n is returned unreversed because the tangled
    graph is invariant under reversal, so graph-level consumers can use it
    directly.
    """
    trace = sample_trace(n, q, rng)
    return trace, mallows_process(trace)


# ---------------------------------------------------------------------------
# permutation statistics
# ---------------------------------------------------------------------------


def _image_of(p: Permutation | Sequence[int]) -> tuple[int, ...]:
    return p.image if isinstance(p, Permutation) else tuple(int(x) for x in p)


def inversions(p: Permutation | Sequence[int]) -> int:
    """Number of pairs i < j with p(i) > p(j)."""
    a = np.asarray(_image_of(p))
    if a.size < 2:
        return 0
    return int(np.triu(a[:, None] > a[None, :], k=1).sum())


def reverse(p: Permutation | Sequence[int]) -> Permutation:
    """sigma^R with sigma^R(i) = sigma(n + 1 - i).

    inv(sigma^R) = C(n, 2) - inv(sigma), so reversal swaps the roles of q and
    1/q under the Mallows measure; it is how process outputs r_n turn into
    mu_{n,q} samples.
    """
    return Permutation(_image_of(p)[::-1])


def standardize(window: Sequence[int]) -> Permutation:
    """Rank-transform distinct numbers to a permutation: (5,7,4,2,9) -> (3,4,2,1,5)."""
    vals = list(window)
    if len(set(vals)) != len(vals):
        raise ValueError("window entries must be distinct")
    rank = {v: r for r, v in enumerate(sorted(vals), 1)}
    return Permutation(tuple(rank[v] for v in vals))


def contains_consecutively(
    pi: Permutation | Sequence[int], sigma: Permutation | Sequence[int]
) -> int | None:
    """Smallest 1-based index i with standardize(pi(i..i+k-1)) == sigma, else None."""
    big = _image_of(pi)
    pat = _image_of(sigma)
    k = len(pat)
    if k == 0 or k > len(big):
        return None
    for i in range(len(big) - k + 1):
        if standardize(big[i : i + k]).image == pat:
            return i + 1
    return None


# ---------------------------------------------------------------------------
# exact distributional quantities
# ---------------------------------------------------------------------------


def log_partition_function(n: int, q: float) -> float:
    """log Z_{n,q} where Z_{n,q} = prod_{i=1..n} (1 + q + ... + q^{i-1}).

    Accumulated in log space so large n never overflows.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    if q == 1.0:
        return math.lgamma(n + 1)
    if q == 0.0:
        return 0.0
    logq = math.log(q)
    log_1mq = math.log1p(-q)
    return sum(math.log(-math.expm1(i * logq)) - log_1mq for i in range(1, n + 1))


def partition_function(n: int, q: float) -> float:
    if q == 1.0:
        return float(math.factorial(n)) if n <= 170 else math.inf
    logz = log_partition_function(n, q)
    return math.inf if logz > 709.0 else math.exp(logz)


def mallows_pmf(p: Permutation | Sequence[int], q: float) -> float:
    """mu_{n,q}(p) = q^inv(p) / Z_{n,q}; point mass at the identity when q = 0."""
    img = _image_of(p)
    n = len(img)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    if q == 0.0:
        return 1.0 if img == tuple(range(1, n + 1)) else 0.0
    if q == 1.0:
        return math.exp(-math.lgamma(n + 1))
    return math.exp(inversions(img) * math.log(q) - log_partition_function(n, q))


def enumerate_traces(
    n: int, q: float
) -> Iterator[tuple[InsertionTrace, float]]:
    """All prod_{i<=n} i traces with their probabilities; refuses n > 9.

    The weights are the products of truncated-geometric masses and sum to 1
    over the full enumeration (up to float roundoff).
    """
    if n > ENUMERATION_CAP:
        raise CapabilityError(
            f"exact trace enumeration supports n <= {ENUMERATION_CAP}, got n={n}"
        )
    if n < 1:
        raise ValueError("n must be >= 1")
    pmfs = [TruncatedGeometric(i, q).pmf_vector() for i in range(1, n + 1)]
    for combo in _iter_product(*(range(1, i + 1) for i in range(1, n + 1))):
        w = 1.0
        for i, v in enumerate(combo):
            w *= pmfs[i][v - 1]
        yield InsertionTrace(combo, q), w


def tv_distance_to_uniform(k: int, q: float) -> float:
    """Total variation distance between the truncated geometric on {1..k} and uniform."""
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = TruncatedGeometric(k, q)
    return 0.5 * sum(abs(dist.pmf(j) - 1.0 / k) for j in range(1, k + 1))


# ---------------------------------------------------------------------------
# displacement estimation
# ---------------------------------------------------------------------------


def displacement_samples(
    n: int, q: float, i: int, trials: int, seed: int, chunk: int = 4096
) -> np.ndarray:
    """Monte Carlo samples distributed as |sigma(i) - i| under sigma ~ mu_{n,q}.

    Tracks the final position p of value i in the process output r_n: after its
    own insertion p = v_i, and each later insertion at v_j <= p pushes it right
    by one.  Then n + 1 - p = sigma^{-1}(i), and because inv(sigma) =
    inv(sigma^{-1}) the Mallows measure is closed under inverse, so
    |sigma^{-1}(i) - i| has exactly the law of |sigma(i) - i|.  The position
    scan vectorizes across trials; constructing sigma(i) directly would not.
    """
    if not 1 <= i <= n:
        raise ValueError(f"index i={i} outside [1, {n}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out = np.empty(trials, dtype=np.int64)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        seeds = derive_array(seed, np.arange(done, done + m, dtype=np.uint64))
        v = sample_trace_matrix(n, q, seeds)
        p = v[:, i - 1].copy()
        for j in range(i + 1, n + 1):
            p += v[:, j - 1] <= p
        out[done : done + m] = np.abs((n + 1 - p) - i)
        done += m
    return out


def displacement_tail_empirical(
    n: int, q: float, i: int, t: int, trials: int, seed: int
) -> float:
    """Empirical estimate of Pr[|sigma(i) - i| >= t] for sigma ~ mu_{n,q}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    samples = displacement_samples(n, q, i, trials, seed)
    return float(np.count_nonzero(samples >= t)) / trials


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------


def format_permutation(p: Permutation | Sequence[int]) -> str:
    return "σ = " + " ".join(str(x) for x in _image_of(p))


def format_trace(trace: InsertionTrace | Sequence[int]) -> str:
    pos = trace.positions if isinstance(trace, InsertionTrace) else trace
    return "v = " + " ".join(str(x) for x in pos)


def _parse_ints(text: str) -> tuple[int, ...]:
    body = text.split("=", 1)[1] if "=" in text else text
    parts = body.replace(",", " ").split()
    if not parts:
        raise ValueError(f"no integers found in {text!r}")
    return tuple(int(x) for x in parts)


def parse_permutation(text: str) -> Permutation:
    """Accepts 'σ = 3 5 1 4 6 2', '3 5 1 4 6 2', or comma-separated digits."""
    return Permutation(_parse_ints(text))


def parse_trace(text: str, q: float, seed: int | None = None) -> InsertionTrace:
    """Accepts 'v = 1 2 1 3 2 5' or bare integer lists, validating 1 <= v_i <= i."""
    return InsertionTrace(_parse_ints(text), q, seed)
