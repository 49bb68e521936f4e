"""Flush-family events on insertion traces, their exact probabilities, and the
analytic bounds that locate the separator threshold.

The events, for a trace (v_1, ..., v_n):

* flush F_k: every later insertion stays k slots clear of the right end,
  v_i <= i - k for all i > k.  After F_k the first k values occupy the last k
  positions of r_n in reversed order.
* reverse flush R_k: every later insertion lands right of slot k, v_i > k for
  all i > k.
* forward cut event C_k^F = F_k and v_k = 1; reverse cut event C_k^R = R_k and
  v_k = k.  For 2 <= k <= n-1, vertex k is a cut vertex of the tangled graph
  exactly when C_k^F or C_k^R holds, which is what makes O(n) trace scans a
  substitute for graph algorithms.
* local flush L_k: the F_k condition restricted to k < i <= k + b(q) with
  b(q) = ceil(8 log n / log(1/q)).
* sparse flush S(k, b, ell): some k <= t_1 < ... < t_b <= k + ell with
  v_{t_i} <= i.

All detectors run in O(n) per trace via suffix scans, vectorized across whole
trial batches.  Probabilities are evaluated in log space throughout and clamped
to [0, 1] with a 1e-12 tolerance for round-trip drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._util import alpha_cut_range, clamp01
from .errors import CapabilityError
from .mallows import InsertionTrace

_PI2_6 = math.pi * math.pi / 6.0


def _positions_of(trace: InsertionTrace | Sequence[int]) -> tuple[tuple[int, ...], float | None]:
    if isinstance(trace, InsertionTrace):
        return trace.positions, trace.q
    pos = tuple(int(v) for v in trace)
    for i, v in enumerate(pos, 1):
        if not 1 <= v <= i:
            raise ValueError(f"position v_{i}={v} outside [1, {i}]")
    return pos, None


# ---------------------------------------------------------------------------
# detection
# ---------------------------------------------------------------------------


def event_flag_matrix(v: np.ndarray) -> dict[str, np.ndarray]:
    """Per-k event flags for a batch of traces.

    ``v`` has shape (m, n), row = one trace.  Returns boolean (m, n) arrays
    keyed "flush", "reverse_flush", "cut_forward", "cut_reverse"; column k-1
    holds the flag for index k.  Uses that F_k is equivalent to
    min_{i>k} (i - v_i) >= k and R_k to min_{i>k} v_i > k, so one reversed
    cumulative minimum per family covers every k at once.
    """
    v = np.asarray(v, dtype=np.int64)
    m, n = v.shape
    i_grid = np.arange(1, n + 1, dtype=np.int64)
    d = i_grid[None, :] - v
    # suffix_min[:, j] = min over columns >= j
    suffix_d = np.minimum.accumulate(d[:, ::-1], axis=1)[:, ::-1]
    suffix_v = np.minimum.accumulate(v[:, ::-1], axis=1)[:, ::-1]
    big = np.int64(1 << 60)
    after_d = np.concatenate([suffix_d[:, 1:], np.full((m, 1), big)], axis=1)
    after_v = np.concatenate([suffix_v[:, 1:], np.full((m, 1), big)], axis=1)
    flush = after_d >= i_grid[None, :]
    reverse_flush = after_v > i_grid[None, :]
    cut_forward = flush & (v == 1)
    cut_reverse = reverse_flush & (v == i_grid[None, :])
    return {
        "flush": flush,
        "reverse_flush": reverse_flush,
        "cut_forward": cut_forward,
        "cut_reverse": cut_reverse,
    }


def b_value(n: int, q: float) -> int:
    """b(q) = ceil(8 log n / log(1/q)); finite only for 0 < q < 1."""
    if not 0.0 < q < 1.0:
        raise CapabilityError(f"b(q) is undefined at q={q}; needs 0 < q < 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.ceil(8.0 * math.log(n) / math.log(1.0 / q))


def sparse_flush_holds(
    positions: Sequence[int], k: int, b: int, ell: int
) -> bool:
    """Does S(k, b, ell) hold: indices k <= t_1 < ... < t_b <= k + ell with
    v_{t_i} <= i?

    Greedy earliest match is exact here: the i-th threshold v_t <= i only
    loosens as i grows, so taking the first index satisfying the current
    threshold can never block a later match that some other selection would
    have allowed.
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    n = len(positions)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    need = 1
    for t in range(k, min(k + ell, n) + 1):
        if positions[t - 1] <= need:
            need += 1
            if need > b:
                return True
    return False


@dataclass(frozen=True)
class EventReport:
    """Flags for every index of one trace, plus the derived cut set.

    Arrays are indexed by k-1.  ``local_flush`` is None when b(q) is undefined
    (q = 0 or 1) or detection was switched off; ``sparse`` holds one entry per
    requested (k, b, ell) triple.
    """

    n: int
    q: float
    flush: tuple[bool, ...]
    reverse_flush: tuple[bool, ...]
    cut_forward: tuple[bool, ...]
    cut_reverse: tuple[bool, ...]
    cut_set: tuple[int, ...]
    local_flush: tuple[bool, ...] | None = None
    b: int | None = None
    sparse: dict = field(default_factory=dict)


def detect_events(
    trace: InsertionTrace | Sequence[int],
    *,
    local: bool | None = None,
    sparse: Iterable[tuple[int, int, int]] = (),
) -> EventReport:
    """Evaluate every per-k event family on one trace.

    ``local`` controls L_k detection: None computes it whenever b(q) is finite
    (0 < q < 1), True demands it (refusing at q in {0, 1}), False skips it.
    ``sparse`` is an iterable of (k, b, ell) triples to evaluate for
    S(k, b, ell); requesting any at q in {0, 1} is refused since the natural b
    is undefined there.  F/R/C flags are always computed.
    """
    positions, q = _positions_of(trace)
    n = len(positions)
    v = np.asarray(positions, dtype=np.int64)[None, :]
    flags = event_flag_matrix(v)
    flush = flags["flush"][0]
    cf = flags["cut_forward"][0]
    cr = flags["cut_reverse"][0]
    cut_set = tuple(
        int(k) for k in range(2, n) if cf[k - 1] or cr[k - 1]
    )

    bval: int | None = None
    local_flush: tuple[bool, ...] | None = None
    want_local = local if local is not None else (q is not None and 0.0 < q < 1.0)
    if want_local:
        if q is None:
            raise ValueError("local flush needs a trace carrying q; wrap in InsertionTrace")
        bval = b_value(n, q)  # refuses at q in {0, 1}
        lf = []
        for k in range(1, n + 1):
            hi = min(k + bval, n)
            lf.append(
                all(positions[i - 1] <= i - k for i in range(k + 1, hi + 1))
            )
        local_flush = tuple(lf)

    sparse_results: dict = {}
    sparse = tuple(sparse)
    if sparse:
        if q is None:
            raise ValueError("sparse flush needs a trace carrying q; wrap in InsertionTrace")
        if not 0.0 < q < 1.0:
            raise CapabilityError(
                f"sparse flush needs 0 < q < 1 (b undefined at q={q})"
            )
        if bval is None:
            bval = b_value(n, q)
        for k, b, ell in sparse:
            sparse_results[(k, b, ell)] = sparse_flush_holds(positions, k, b, ell)

    return EventReport(
        n=n,
        q=q if q is not None else float("nan"),
        flush=tuple(bool(x) for x in flush),
        reverse_flush=tuple(bool(x) for x in flags["reverse_flush"][0]),
        cut_forward=tuple(bool(x) for x in cf),
        cut_reverse=tuple(bool(x) for x in cr),
        cut_set=cut_set,
        local_flush=local_flush,
        b=bval,
        sparse=sparse_results,
    )


def cut_vertices_from_trace(trace: InsertionTrace | Sequence[int]) -> set[int]:
    """Cut vertices of the tangled graph of ``trace``, read off the trace alone.

    Equals articulation_points(build_tangled(mallows_process(trace))) for every
    trace; n < 3 has no internal vertices, so the set is empty.
    """
    positions, _ = _positions_of(trace)
    n = len(positions)
    if n < 3:
        return set()
    v = np.asarray(positions, dtype=np.int64)[None, :]
    flags = event_flag_matrix(v)
    hit = flags["cut_forward"][0] | flags["cut_reverse"][0]
    return {int(k) for k in range(2, n) if hit[k - 1]}


# ---------------------------------------------------------------------------
# exact probabilities
# ---------------------------------------------------------------------------


def _log1m_qpow(exponents: np.ndarray, logq: float) -> np.ndarray:
    """log(1 - q^e) for positive exponents, via expm1 for accuracy."""
    return np.log(-np.expm1(exponents * logq))


def _log_flush(n: int, k: int, q: float) -> float:
    """log Pr[F_k] = sum_{i=1..m} [log(1-q^i) - log(1-q^{n-m+i})], m = min(k, n-k).

    The product is symmetric in k <-> n-k, so the shorter side is summed.
    """
    m = min(k, n - k)
    if m == 0 or q == 0.0:
        return 0.0
    if q == 1.0:
        return math.lgamma(k + 1) + math.lgamma(n - k + 1) - math.lgamma(n + 1)
    logq = math.log(q)
    i = np.arange(1, m + 1, dtype=np.float64)
    return float(
        np.sum(_log1m_qpow(i, logq)) - np.sum(_log1m_qpow(i + (n - m), logq))
    )


def flush_prob(n: int, k: int, q: float) -> float:
    """Pr[F_k] = prod_{i=1..k} (1 - q^i) / (1 - q^{n-k+i}), exactly.

    q = 0 gives 1 (all v_i = 1 satisfy every flush); q = 1 is the telescoped
    limit k! (n-k)! / n!, evaluated through lgamma.
    """
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    return clamp01(math.exp(_log_flush(n, k, q)))


def reverse_flush_prob(n: int, k: int, q: float) -> float:
    """Pr[R_k] = q^{k(n-k)} * Pr[F_k], evaluated in log space."""
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    if q == 0.0:
        return 1.0 if k == n else 0.0
    if q == 1.0:
        return flush_prob(n, k, q)
    return clamp01(math.exp(_log_flush(n, k, q) + k * (n - k) * math.log(q)))


def _log_pick_first(k: int, q: float) -> float:
    """log Pr[v_k = 1] = log((1-q)/(1-q^k))."""
    if q == 1.0:
        return -math.log(k)
    return math.log1p(-q) - math.log(-math.expm1(k * math.log(q)))


def cut_event_probs(n: int, k: int, q: float) -> tuple[float, float]:
    """(Pr[C_k^F], Pr[C_k^R]) for an internal vertex 2 <= k <= n-1.

    Pr[C_k^F] = Pr[F_k] * (1-q)/(1-q^k) by independence of v_k from later
    positions; Pr[C_k^R] = q^{k(n-k+1)-1} * Pr[C_k^F].
    """
    if not 2 <= k <= n - 1:
        raise ValueError(f"k={k} outside [2, {n - 1}]")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    if q == 0.0:
        return 1.0, 0.0
    log_pf = _log_flush(n, k, q) + _log_pick_first(k, q)
    if q == 1.0:
        p = clamp01(math.exp(log_pf))
        return p, p
    log_pr = log_pf + (k * (n - k + 1) - 1) * math.log(q)
    return clamp01(math.exp(log_pf)), clamp01(math.exp(log_pr))


def expected_cuts(n: int, q: float, alpha: float) -> float:
    """E[X_n(alpha)] = sum over k in [ceil((1-alpha)n), floor(alpha n)] of
    Pr[C_k^F] + Pr[C_k^R]."""
    k_lo, k_hi = alpha_cut_range(n, alpha)
    return expected_cuts_in_range(n, q, k_lo, k_hi)


def expected_cuts_in_range(n: int, q: float, k_lo: int, k_hi: int) -> float:
    """Sum of Pr[C_k^F] + Pr[C_k^R] over k_lo <= k <= k_hi (clamped to [1, n]).

    Vectorized via prefix sums of log(1 - q^i): log Pr[F_k] = A(k) + A(n-k)
    - A(n) with A(m) = sum_{i<=m} log(1-q^i).
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    k_lo, k_hi = max(1, k_lo), min(n, k_hi)
    if k_lo > k_hi:
        return 0.0
    ks = np.arange(k_lo, k_hi + 1, dtype=np.int64)
    if q == 0.0:
        return float(len(ks))  # every C_k^F certain, every C_k^R impossible
    if q == 1.0:
        lg = np.vectorize(math.lgamma)
        log_flush = lg(ks + 1) + lg(n - ks + 1) - math.lgamma(n + 1)
        log_pf = log_flush - np.log(ks)
        return float(2.0 * np.exp(log_pf).sum())
    logq = math.log(q)
    prefix = np.concatenate(
        [[0.0], np.cumsum(_log1m_qpow(np.arange(1, n + 1, dtype=np.float64), logq))]
    )
    log_flush = prefix[ks] + prefix[n - ks] - prefix[n]
    log_pf = log_flush + math.log1p(-q) - _log1m_qpow(ks.astype(np.float64), logq)
    log_pr = log_pf + (ks * (n - ks + 1) - 1) * logq
    return float(np.exp(log_pf).sum() + np.exp(log_pr).sum())


# ---------------------------------------------------------------------------
# analytic bounds
# ---------------------------------------------------------------------------


def dilogarithm(x: float) -> float:
    """Li_2(x) for 0 <= x <= 1; Li_2(1) = pi^2/6.

    Power series for x <= 1/2, the standard reflection through
    Li_2(x) + Li_2(1-x) = pi^2/6 - log(x) log(1-x) above.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"dilogarithm implemented on [0, 1]; got {x}")
    if x == 1.0:
        return _PI2_6
    if x > 0.5:
        return _PI2_6 - math.log(x) * math.log1p(-x) - dilogarithm(1.0 - x)
    total = 0.0
    term = x
    k = 1
    while abs(term) / (k * k) > 1e-18:
        total += term / (k * k)
        k += 1
        term *= x
    return total


def euler_log_product(q: float, tol: float = 1e-15) -> float:
    """sum_{i>=1} log(1 - q^i), truncated when |log(1-q^i)| < tol."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"needs 0 < q < 1; got q={q}")
    total = 0.0
    i = 1
    while True:
        term = math.log1p(-(q**i))
        total += term
        if abs(term) < tol:
            return total
        i += 1


def flush_log_bounds(n: int, k: int, q: float) -> tuple[float, float]:
    """Sandwich for log Pr[F_k]:

        pi^2/(6 log q) - log(1-q)/2 + q log q / (6(1-q))  <=  log Pr[F_k]
        <=  pi^2/(6 log q) - log(1-q)/2
            + 2 q^m / ((1-q)(1 - q^m)) - (1-q)/(q log q),    m = min(n-k, k).

    m = 0 (k = n) makes the event certain and the finite-size correction
    degenerate; the upper bound is +inf there.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"needs 0 < q < 1; got q={q}")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    logq = math.log(q)
    center = _PI2_6 / logq - 0.5 * math.log1p(-q)
    lower = center + q * logq / (6.0 * (1.0 - q))
    m = min(n - k, k)
    if m == 0:
        return lower, math.inf
    qm = q**m
    upper = center + 2.0 * qm / ((1.0 - q) * (1.0 - qm)) - (1.0 - q) / (q * logq)
    return lower, upper


def flush_cheap_bound(n: int, k: int, q: float) -> float:
    """Upper bound exp(-q (1 - q^m) / (2(1-q))), m = min(k, n-k), on Pr[F_k]."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"needs 0 < q < 1; got q={q}")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    m = min(k, n - k)
    return clamp01(math.exp(-q * (1.0 - q**m) / (2.0 * (1.0 - q))))


@dataclass(frozen=True)
class CutProbWindow:
    """Closed-form window for Pr[C_k^F]; ``lower`` is None in relaxed mode."""

    lower: float | None
    upper: float
    relaxed: bool


def cut_prob_window(
    n: int, k: int, q: float, alpha: float, relaxed: bool = False
) -> CutProbWindow:
    """The k-independent window [e^{-1/6} w, e^5 w], w = sqrt(1-q) exp(-pi^2/(6(1-q))).

    Hypotheses checked: k inside the alpha cut range, 1 <= 1/(1-q) <= n^{4/5},
    and n >= (100/(1-alpha))^5.  The size hypothesis is astronomically large
    for interesting alpha; ``relaxed=True`` skips it explicitly and then only
    the upper end is claimed (lower is returned as None).
    """
    k_lo, k_hi = alpha_cut_range(n, alpha)
    if not k_lo <= k <= k_hi:
        raise CapabilityError(
            f"k={k} outside the cut range [{k_lo}, {k_hi}] for alpha={alpha}"
        )
    if not 0.0 < q < 1.0:
        raise CapabilityError(f"window needs 0 < q < 1; got q={q}")
    inv1mq = 1.0 / (1.0 - q)
    if not 1.0 <= inv1mq <= n ** 0.8:
        raise CapabilityError(
            f"window needs 1 <= 1/(1-q) <= n^(4/5); got {inv1mq:.4g} vs {n ** 0.8:.4g}"
        )
    n_min = (100.0 / (1.0 - alpha)) ** 5
    if n < n_min and not relaxed:
        raise CapabilityError(
            f"window hypothesis n >= (100/(1-alpha))^5 = {n_min:.3g} fails for "
            f"n={n}; pass relaxed=True to claim the upper bound only"
        )
    w = math.sqrt(1.0 - q) * math.exp(-_PI2_6 * inv1mq)
    lower = None if (relaxed and n < n_min) else math.exp(-1.0 / 6.0) * w
    return CutProbWindow(lower=lower, upper=math.exp(5.0) * w, relaxed=relaxed and n < n_min)


@dataclass(frozen=True)
class ThresholdWindow:
    """q values bracketing the separator threshold at a given n.

    q_critical = 1 - pi^2/(6 log n); the exist/nonexist values push log n by
    margin * log log n in each direction, so q_exist < q_critical < q_nonexist
    whenever margin > 0 (equality at margin 0).
    """

    n: int
    margin: float
    q_exist: float
    q_critical: float
    q_nonexist: float


def threshold_window(n: int, margin: float) -> ThresholdWindow:
    if n < 16:
        raise ValueError(f"threshold window needs n >= 16; got {n}")
    if margin < 0:
        raise ValueError(f"margin must be >= 0; got {margin}")
    logn = math.log(n)
    llog = math.log(logn)
    if llog <= 0:
        raise ValueError(f"log log n = {llog} <= 0 at n={n}")
    denom_exist = logn - margin * llog
    if denom_exist <= 0:
        raise ValueError(
            f"margin {margin} too large at n={n}: log n - margin log log n <= 0"
        )
    q_exist = max(0.0, 1.0 - _PI2_6 / denom_exist)
    q_critical = 1.0 - _PI2_6 / logn
    q_nonexist = 1.0 - _PI2_6 / (logn + margin * llog)
    return ThresholdWindow(n, margin, q_exist, q_critical, q_nonexist)


# ---------------------------------------------------------------------------
# bad edges and concentration bounds
# ---------------------------------------------------------------------------


def bad_edge_classification(
    trace: InsertionTrace | Sequence[int], i: int, ell: int, L: int
) -> tuple[list[tuple[int, int]], tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Edges of the permuted path that straddle vertex i, and the A/B/C split.

    A permuted-path edge {j, k} is bad for i when j < i < k.  The indices
    above i partition into A_i = {i+1 .. i+L : v > ell} (late-insertion
    candidates), B_i = the rest of that window, and C_i = {i+L+1 .. n}.
    """
    from .mallows import mallows_process

    positions, _ = _positions_of(trace)
    n = len(positions)
    if not 1 <= i <= n:
        raise ValueError(f"i={i} outside [1, {n}]")
    if ell > L:
        raise ValueError(f"ell={ell} exceeds L={L}")
    sigma = mallows_process(positions)
    bad = sorted(
        (min(a, b), max(a, b))
        for a, b in zip(sigma.image, sigma.image[1:])
        if min(a, b) < i < max(a, b)
    )
    window = range(i + 1, min(i + L, n) + 1)
    a_set = tuple(k for k in window if positions[k - 1] > ell)
    b_set = tuple(k for k in window if positions[k - 1] <= ell)
    c_set = tuple(range(i + L + 1, n + 1))
    return bad, a_set, b_set, c_set


def janson_tail_bound(lam: float, mu: float, p_star: float) -> float:
    """Tail bound lam^{-1} (1-p_star)^{mu (lam - 1 - log lam)} for sums of
    independent geometrics with success probs >= p_star and mean mu."""
    if lam < 1.0:
        raise ValueError(f"lambda must be >= 1; got {lam}")
    if mu < 0.0:
        raise ValueError(f"mu must be >= 0; got {mu}")
    if not 0.0 < p_star <= 1.0:
        raise ValueError(f"p_star must be in (0, 1]; got {p_star}")
    exponent = mu * (lam - 1.0 - math.log(lam))
    if p_star == 1.0:
        power = 1.0 if exponent == 0.0 else 0.0
    else:
        power = math.exp(exponent * math.log1p(-p_star))
    return clamp01(power / lam)


def chernoff_bound(mu: float, delta: float) -> float:
    """Poisson-style upper tail (e^delta / (1+delta)^{1+delta})^mu."""
    if mu < 0.0:
        raise ValueError(f"mu must be >= 0; got {mu}")
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0; got {delta}")
    return clamp01(math.exp(mu * (delta - (1.0 + delta) * math.log1p(delta))))


def sparse_flush_bound(
    n: int, b: int, q: float, lam: float
) -> tuple[float, float]:
    """(ell, bound): window length ell = lam (b + q/(1-q) + log((1-q)/(1-q^b))/log q)
    and the failure bound Pr[S(k, b, ell)^c] <= ((1-q) q^b / (1-q^b))^{lam-1-log lam}.

    ell may exceed n; the event is then evaluated on the truncated window and
    the bound still applies.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"needs 0 < q < 1; got q={q}")
    if b < 1:
        raise ValueError(f"b must be >= 1; got {b}")
    if lam < 1.0:
        raise ValueError(f"lambda must be >= 1; got {lam}")
    if n < 1:
        raise ValueError("n must be >= 1")
    logq = math.log(q)
    log_1mqb = math.log(-math.expm1(b * logq))
    ell = lam * (b + q / (1.0 - q) + (math.log1p(-q) - log_1mqb) / logq)
    log_base = math.log1p(-q) + b * logq - log_1mqb
    bound = clamp01(math.exp((lam - 1.0 - math.log(lam)) * log_base))
    return ell, bound
