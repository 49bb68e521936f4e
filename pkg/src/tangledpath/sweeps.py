"""Reproducible Monte Carlo sweeps over (n, q) grids.

A sweep walks cells (one per n and resolved q), runs a fixed number of trials
per cell, and aggregates per-trial statistics into rows of

    experiment, n, q, alpha, trials, stat, mean, stderr, exact, runtime_ms

sorted by (n, q, stat).  Wherever a closed form exists (expected cut counts,
flush probabilities, q=0 degenerate values) it lands in the ``exact`` column
and the row is checked against a 4*stderr band.

Reproducibility contract: trial t of cell c draws its entire randomness from
the stream seeded by derive(master_seed, c, t), trials are dispatched in
fixed-size chunks whose boundaries do not depend on the thread count, and
chunk results are merged in trial order.  The CSV output is therefore byte
identical for a fixed config and seed at any thread count; measured runtimes,
which cannot be deterministic, are recorded in the rows and the JSON mirror
while the CSV's runtime_ms column is left empty.

q grids accept plain floats or window tokens resolved per n through
threshold_window: "critical", "critical-3margin" (the existence side q_exist),
"critical+3margin" (the non-existence side q_nonexist), and
"critical+-3margin" (both; the spellings ±, +-, and an optional * before
"margin" are accepted).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
import dataclasses
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import CapabilityError, StatisticalCheckError
from .events import (
    event_flag_matrix,
    expected_cuts_in_range,
    flush_prob,
    threshold_window,
)
from ._util import alpha_cut_range
from .graph import build_tangled, diameter
from .mallows import (
    ENUMERATION_CAP,
    enumerate_traces,
    mallows_process,
    sample_trace_matrix,
)
from .rng import derive, derive_array, uniform_matrix
from .widths import EXACT_CAP, cutwidth_identity, treewidth_exact, vertex_iso

RNG_NAME = "splitmix64"
CODE_VERSION = "0.1.0"

EXPERIMENT_KINDS = (
    "separator",
    "width",
    "diameter",
    "expansion",
    "flush-validate",
    "displacement",
)

# Band slack absorbs float round-trip drift on zero-variance rows and matches
# the tolerance used for exact-oracle comparisons elsewhere.
BAND_SLACK = 1e-9


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs; immutable so cells can share it freely.

    ``q_grid`` entries are floats or window tokens (see module docstring).
    The extras beyond the common fields: ``k_fracs`` picks flush-validate k
    values as fractions of n, ``i_frac``/``t_list`` shape displacement cells,
    ``bisections`` sizes the large-n expansion estimate, and ``exhaustive``
    switches flush-validate to weighted enumeration (n <= 9).
    """

    experiment: str
    n_list: tuple[int, ...]
    q_grid: tuple[float | str, ...]
    alpha: float = 2.0 / 3.0
    trials: int = 100
    master_seed: int = 0
    thread_count: int = 1
    out: str | None = None
    plot_out: str | None = None
    margin: float = 3.0
    k_fracs: tuple[float, ...] = (0.5,)
    i_frac: float = 0.5
    t_list: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
    bisections: int = 32
    exhaustive: bool = False

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(
                f"experiment {self.experiment!r} not one of {EXPERIMENT_KINDS}"
            )
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if any(n < 1 for n in self.n_list):
            raise ValueError("all n must be >= 1")
        if not self.q_grid:
            raise ValueError("q_grid must be nonempty")
        for q in self.q_grid:
            if isinstance(q, str):
                continue
            if not 0.0 <= float(q) <= 1.0:
                raise ValueError(f"q={q} outside [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if not 0.5 < self.alpha < 1.0:
            raise ValueError(f"alpha={self.alpha} outside (1/2, 1)")


def resolve_q_token(token: float | str, n: int) -> list[float]:
    """Expand one q_grid entry for a given n; floats pass through."""
    if not isinstance(token, str):
        return [float(token)]
    s = token.strip().lower().replace(" ", "").replace("·", "*")
    if not s.startswith("critical"):
        raise ValueError(f"unrecognized q token {token!r}")
    rest = s[len("critical") :]
    if rest == "":
        return [threshold_window(n, 0.0).q_critical]
    if rest.startswith(("+-", "-+")):
        side, rest = "both", rest[2:]
    elif rest.startswith("±"):
        side, rest = "both", rest[1:]
    elif rest[0] in "+-":
        side, rest = rest[0], rest[1:]
    else:
        raise ValueError(f"unrecognized q token {token!r}")
    if not rest.endswith("margin"):
        raise ValueError(f"unrecognized q token {token!r}")
    num = rest[: -len("margin")].rstrip("*x")
    margin = float(num) if num else 1.0
    w = threshold_window(n, margin)
    if side == "-":
        return [w.q_exist]
    if side == "+":
        return [w.q_nonexist]
    return [w.q_exist, w.q_nonexist]


def _parse_scalar(text: str):
    low = text.strip()
    if low.lower() in ("true", "false"):
        return low.lower() == "true"
    try:
        return int(low)
    except ValueError:
        pass
    try:
        return float(low)
    except ValueError:
        return low


_LIST_FIELDS = {"n_list", "q_grid", "k_fracs", "t_list"}
_INT_LIST_FIELDS = {"n_list", "t_list"}


def parse_config_text(text: str) -> SweepConfig:
    """Parse JSON or flat key=value lines ('#' comments allowed) into a config."""
    stripped = text.strip()
    if stripped.startswith("{"):
        raw = json.loads(stripped)
    else:
        raw = {}
        for line in stripped.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            if key in _LIST_FIELDS:
                raw[key] = [_parse_scalar(p) for p in value.split(",") if p.strip()]
            else:
                raw[key] = _parse_scalar(value)
    return make_config(**raw)


def make_config(**raw) -> SweepConfig:
    """Build a SweepConfig from loosely typed values (CLI/config plumbing)."""
    clean = dict(raw)
    known = {f.name for f in dataclasses.fields(SweepConfig)}
    unknown = sorted(clean.keys() - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    for key in _LIST_FIELDS & clean.keys():
        vals = clean[key]
        if not isinstance(vals, (list, tuple)):
            vals = [vals]
        if key in _INT_LIST_FIELDS:
            clean[key] = tuple(int(v) for v in vals)
        elif key == "k_fracs":
            clean[key] = tuple(float(v) for v in vals)
        else:  # q_grid keeps strings for window tokens
            clean[key] = tuple(
                v if isinstance(v, str) else float(v) for v in vals
            )
    return SweepConfig(**clean)


def config_from_file(path: str | Path) -> SweepConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise OSError(f"cannot read sweep config {p}: {exc}") from exc
    return parse_config_text(text)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    experiment: str
    n: int
    q: float
    alpha: float
    trials: int
    stat: str
    mean: float
    stderr: float | None
    exact: float | None
    runtime_ms: float | None
    within_band: bool | None = None


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    metadata: dict

    def failing_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.within_band is False]


def _finish_row(row: SweepRow) -> SweepRow:
    if row.exact is not None:
        tol = 4.0 * (row.stderr or 0.0) + BAND_SLACK
        if row.stderr == 0.0:
            # No variation observed, so the empirical band has zero width.
            # Allow one count of resolution: a rare event with
            # exact * trials < 1 legitimately shows nothing, while a broken
            # statistic that should fire every few trials still fails.
            tol += 1.0 / max(1, row.trials)
        row.within_band = abs(row.mean - row.exact) <= tol
    return row


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    sd = float(values.std(ddof=1))
    return mean, sd / math.sqrt(values.size)


# ---------------------------------------------------------------------------
# cell execution
# ---------------------------------------------------------------------------


def _chunk_bounds(trials: int, n: int) -> list[tuple[int, int]]:
    """Fixed trial chunks; sized by n only so thread count cannot move them."""
    chunk = max(1, min(64, (1 << 20) // max(1, n)))
    return [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]


def _run_cell(
    cfg: SweepConfig,
    cell_index: int,
    n: int,
    trial_fn: Callable[[np.ndarray], dict[str, np.ndarray]],
) -> dict[str, np.ndarray]:
    """Run all trials of one cell, chunked across worker threads.

    ``trial_fn`` maps a vector of per-trial seeds to per-trial statistic
    arrays.  Chunk results are concatenated in trial order, so the outcome is
    independent of thread count; any trial failure aborts the sweep with the
    cell context attached.
    """
    cell_seed = derive(cfg.master_seed, cell_index)
    bounds = _chunk_bounds(cfg.trials, n)

    def work(span: tuple[int, int]) -> dict[str, np.ndarray]:
        lo, hi = span
        seeds = derive_array(cell_seed, np.arange(lo, hi, dtype=np.uint64))
        return trial_fn(seeds)

    try:
        if cfg.thread_count == 1:
            parts = [work(span) for span in bounds]
        else:
            with ThreadPoolExecutor(max_workers=cfg.thread_count) as pool:
                parts = list(pool.map(work, bounds))
    except Exception as exc:
        raise RuntimeError(
            f"trial failure in cell {cell_index} (n={n}): {exc}"
        ) from exc
    merged: dict[str, np.ndarray] = {}
    for key in parts[0]:
        merged[key] = np.concatenate([p[key] for p in parts])
        if merged[key].shape[0] != cfg.trials:
            raise RuntimeError(
                f"cell {cell_index} (n={n}) produced {merged[key].shape[0]} trials, "
                f"expected {cfg.trials}: refusing to drop trials silently"
            )
    return merged


def _cells(cfg: SweepConfig) -> list[tuple[int, int, float]]:
    """(cell_index, n, q) in deterministic order; window tokens expanded per n."""
    out = []
    index = 0
    for n in cfg.n_list:
        for token in cfg.q_grid:
            for q in resolve_q_token(token, n):
                out.append((index, n, q))
                index += 1
    return out


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def run_separator_sweep(cfg: SweepConfig) -> SweepResult:
    """Cut-vertex counts in the alpha range, from traces alone (no graphs).

    Stats per cell: ``cut_count`` = |cut_set intersect [k_lo, k_hi]| with the
    exact expectation as reference, and ``separator_prob`` = empirical
    Pr[cut_count >= 1].  The counting range is clipped to internal vertices
    {2..n-1}, matching what expected_cuts integrates whenever the alpha range
    is internal.
    """
    cfg = replace(cfg, experiment="separator")
    rows: list[SweepRow] = []
    for cell_index, n, q in _cells(cfg):
        start = time.perf_counter()
        k_lo, k_hi = alpha_cut_range(n, cfg.alpha)
        k_lo = max(k_lo, 2)
        k_hi = min(k_hi, n - 1)

        def trial_fn(seeds: np.ndarray) -> dict[str, np.ndarray]:
            v = sample_trace_matrix(n, q, seeds)
            flags = event_flag_matrix(v)
            hit = flags["cut_forward"] | flags["cut_reverse"]
            window = hit[:, k_lo - 1 : k_hi]
            counts = window.sum(axis=1).astype(np.int64)
            return {"count": counts, "indicator": (counts >= 1).astype(np.int64)}

        data = _run_cell(cfg, cell_index, n, trial_fn)
        ms = (time.perf_counter() - start) * 1000.0
        exact = expected_cuts_in_range(n, q, k_lo, k_hi) if k_lo <= k_hi else 0.0
        mean, se = _mean_stderr(data["count"])
        rows.append(
            _finish_row(
                SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials, "cut_count", mean, se, exact, ms)
            )
        )
        mean, se = _mean_stderr(data["indicator"])
        p_exact = 1.0 if q == 0.0 and k_lo <= k_hi else None
        rows.append(
            _finish_row(
                SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials, "separator_prob", mean, se, p_exact, ms)
            )
        )
    return _finalize(cfg, rows)


def run_flush_validation(cfg: SweepConfig) -> SweepResult:
    """Empirical flush frequencies against the exact product formula.

    One sampling pass per cell serves every k from ``k_fracs``; with two or
    more k values the empirical covariance of the flush indicators is reported
    as an observational row (no sign asserted).  ``exhaustive=True`` switches
    to weighted enumeration over all traces (n <= 9) with stderr 0.
    """
    cfg = replace(cfg, experiment="flush-validate")
    rows: list[SweepRow] = []
    for cell_index, n, q in _cells(cfg):
        start = time.perf_counter()
        ks = sorted(
            {max(1, min(n, math.floor(f * n + 0.5))) for f in cfg.k_fracs}
        )
        if cfg.exhaustive:
            if n > ENUMERATION_CAP:
                raise CapabilityError(
                    f"exhaustive flush validation needs n <= {ENUMERATION_CAP}, got {n}"
                )
            sums = {k: 0.0 for k in ks}
            pair_sums = {(a, b): 0.0 for a in ks for b in ks if a < b}
            count = 0
            for trace, w in enumerate_traces(n, q):
                count += 1
                rep = event_flag_matrix(
                    np.asarray(trace.positions, dtype=np.int64)[None, :]
                )["flush"][0]
                for k in ks:
                    sums[k] += w * bool(rep[k - 1])
                for a, b in pair_sums:
                    pair_sums[(a, b)] += w * (bool(rep[a - 1]) and bool(rep[b - 1]))
            ms = (time.perf_counter() - start) * 1000.0
            for k in ks:
                rows.append(
                    _finish_row(
                        SweepRow(cfg.experiment, n, q, cfg.alpha, count,
                                 f"flush_freq_k{k}", sums[k], 0.0,
                                 flush_prob(n, k, q), ms)
                    )
                )
            for (a, b), s in pair_sums.items():
                cov = s - sums[a] * sums[b]
                rows.append(
                    SweepRow(cfg.experiment, n, q, cfg.alpha, count,
                             f"flush_cov_k{a}_k{b}", cov, None, None, ms)
                )
            continue

        def trial_fn(seeds: np.ndarray) -> dict[str, np.ndarray]:
            v = sample_trace_matrix(n, q, seeds)
            flush = event_flag_matrix(v)["flush"]
            return {f"k{k}": flush[:, k - 1].astype(np.int64) for k in ks}

        data = _run_cell(cfg, cell_index, n, trial_fn)
        ms = (time.perf_counter() - start) * 1000.0
        for k in ks:
            mean, se = _mean_stderr(data[f"k{k}"])
            rows.append(
                _finish_row(
                    SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                             f"flush_freq_k{k}", mean, se, flush_prob(n, k, q), ms)
                )
            )
        for i, a in enumerate(ks):
            for b in ks[i + 1 :]:
                cov = float(np.cov(data[f"k{a}"], data[f"k{b}"], ddof=1)[0, 1]) if cfg.trials > 1 else 0.0
                rows.append(
                    SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                             f"flush_cov_k{a}_k{b}", cov, None, None, ms)
                )
    return _finalize(cfg, rows)


def run_diameter_sweep(cfg: SweepConfig) -> SweepResult:
    """Graph diameters with the |cut_set|+1 lower-bound companion.

    Stats: ``diameter`` (exact n-1 reference at q=0), ``cut_lower_bound``
    (mean of |cut_set|+1), ``diameter_over_n`` (Theorem-scale ratio,
    observational), and ``diambound_violations`` (fraction of trials with
    diameter < |cut_set|+1; exact reference 0, so any violation fails the
    band).
    """
    cfg = replace(cfg, experiment="diameter")
    rows: list[SweepRow] = []
    for cell_index, n, q in _cells(cfg):
        start = time.perf_counter()

        def trial_fn(seeds: np.ndarray) -> dict[str, np.ndarray]:
            v = sample_trace_matrix(n, q, seeds)
            flags = event_flag_matrix(v)
            hit = flags["cut_forward"] | flags["cut_reverse"]
            cuts = hit[:, 1 : n - 1].sum(axis=1).astype(np.int64) if n >= 3 else np.zeros(len(v), dtype=np.int64)
            diams = np.empty(len(v), dtype=np.int64)
            for r in range(len(v)):
                sigma = mallows_process([int(x) for x in v[r]])
                diams[r] = diameter(build_tangled(sigma))
            return {
                "diameter": diams,
                "cut_lb": cuts + 1,
                "violation": (diams < cuts + 1).astype(np.int64),
            }

        data = _run_cell(cfg, cell_index, n, trial_fn)
        ms = (time.perf_counter() - start) * 1000.0
        mean, se = _mean_stderr(data["diameter"])
        rows.append(
            _finish_row(
                SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials, "diameter",
                         mean, se, float(n - 1) if q == 0.0 else None, ms)
            )
        )
        lb_mean, lb_se = _mean_stderr(data["cut_lb"])
        rows.append(
            SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials, "cut_lower_bound",
                     lb_mean, lb_se, None, ms)
        )
        rows.append(
            SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials, "diameter_over_n",
                     mean / n, se / n, None, ms)
        )
        viol_mean, _ = _mean_stderr(data["violation"])
        rows.append(
            _finish_row(
                SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                         "diambound_violations", viol_mean, None, 0.0, ms)
            )
        )
    return _finalize(cfg, rows)


def run_width_sweep(cfg: SweepConfig) -> SweepResult:
    """Width distributions: exact treewidth when n <= 20, identity-layout
    cutwidth at every n, plus the theoretical shape values
    sqrt(log n / log(1/q)) and (1/(1-q)) log(1/(1-q)) for plotting.

    Medians and quartiles are reported (stderr left empty); q=0 cells carry
    the exact path references tw = cw = 1.  At q=1 the shape values are
    undefined and their rows are omitted.
    """
    cfg = replace(cfg, experiment="width")
    rows: list[SweepRow] = []
    for cell_index, n, q in _cells(cfg):
        start = time.perf_counter()
        small = n <= EXACT_CAP

        def trial_fn(seeds: np.ndarray) -> dict[str, np.ndarray]:
            v = sample_trace_matrix(n, q, seeds)
            tw = np.zeros(len(v), dtype=np.int64)
            cw = np.empty(len(v), dtype=np.int64)
            for r in range(len(v)):
                g = build_tangled(mallows_process([int(x) for x in v[r]]))
                cw[r], _ = cutwidth_identity(g)
                if small:
                    tw[r] = treewidth_exact(g)
            out = {"cwid": cw}
            if small:
                out["tw"] = tw
            return out

        data = _run_cell(cfg, cell_index, n, trial_fn)
        ms = (time.perf_counter() - start) * 1000.0
        exact_path = 1.0 if q == 0.0 and n >= 2 else None

        def quartile_rows(name: str, values: np.ndarray) -> None:
            q1, q2, q3 = np.percentile(values, [25.0, 50.0, 75.0])
            rows.append(
                _finish_row(
                    SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                             f"{name}_median", float(q2), None, exact_path, ms)
                )
            )
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 f"{name}_q1", float(q1), None, None, ms))
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 f"{name}_q3", float(q3), None, None, ms))

        quartile_rows("cwid", data["cwid"])
        if small:
            quartile_rows("tw", data["tw"])
        if q < 1.0:
            shape_sqrt = 0.0 if q == 0.0 else math.sqrt(math.log(n) / math.log(1.0 / q)) if n > 1 else 0.0
            shape_lin = 0.0 if q == 0.0 else math.log(1.0 / (1.0 - q)) / (1.0 - q)
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 "shape_sqrt_log", shape_sqrt, None, None, ms))
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 "shape_loglinear", shape_lin, None, None, ms))
    return _finalize(cfg, rows)


def run_expansion_check(cfg: SweepConfig) -> SweepResult:
    """Vertex expansion: exact isoperimetric ratios at n <= 20, random
    balanced-bisection edge-boundary estimates beyond (observational).

    Small-n stats: ``vertex_iso_mean`` (q=0 reference 1/floor(n/2), the path's
    worst set), ``vertex_iso_min``, and ``iso_ge_1_40_frac`` (fraction of
    trials meeting the asymptotic 1/40 constant; logged, never asserted).
    Every sampled graph's maximum degree is checked <= 4; a violation aborts.
    """
    cfg = replace(cfg, experiment="expansion")
    rows: list[SweepRow] = []
    for cell_index, n, q in _cells(cfg):
        start = time.perf_counter()
        small = n <= EXACT_CAP

        def trial_fn(seeds: np.ndarray) -> dict[str, np.ndarray]:
            v = sample_trace_matrix(n, q, seeds)
            out_iso = np.empty(len(v), dtype=np.float64)
            for r in range(len(v)):
                g = build_tangled(mallows_process([int(x) for x in v[r]]))
                if any(len(a) > 4 for a in g.adjacency):
                    raise AssertionError("max degree exceeded 4; model invariant broken")
                if small:
                    out_iso[r] = float(vertex_iso(g))
                else:
                    eu = np.array([e[0] - 1 for e in g.edges])
                    ev = np.array([e[1] - 1 for e in g.edges])
                    bis_seeds = derive_array(
                        int(seeds[r]), np.arange(cfg.bisections, dtype=np.uint64)
                    )
                    keys = uniform_matrix(bis_seeds, n)
                    ranks = np.argsort(keys, axis=1, kind="stable")
                    side = np.zeros((cfg.bisections, n), dtype=bool)
                    half = n // 2
                    row_idx = np.repeat(np.arange(cfg.bisections), half)
                    side[row_idx, ranks[:, :half].ravel()] = True
                    cross = (side[:, eu] ^ side[:, ev]).sum(axis=1)
                    out_iso[r] = float(cross.min()) / half
            return {"iso": out_iso}

        data = _run_cell(cfg, cell_index, n, trial_fn)
        ms = (time.perf_counter() - start) * 1000.0
        iso = data["iso"]
        if small:
            mean, se = _mean_stderr(iso)
            exact = (1.0 / (n // 2)) if (q == 0.0 and n >= 2) else None
            rows.append(
                _finish_row(
                    SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                             "vertex_iso_mean", mean, se, exact, ms)
                )
            )
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 "vertex_iso_min", float(iso.min()), None, None, ms))
            frac_mean, frac_se = _mean_stderr((iso >= 1.0 / 40.0).astype(np.float64))
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 "iso_ge_1_40_frac", frac_mean, frac_se, None, ms))
        else:
            mean, se = _mean_stderr(iso)
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 "bisection_ratio_mean", mean, se, None, ms))
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 "bisection_ratio_min", float(iso.min()), None, None, ms))
    return _finalize(cfg, rows)


def run_displacement_sweep(cfg: SweepConfig) -> SweepResult:
    """Displacement tails Pr[|sigma(i) - i| >= t] at i = round(i_frac * n),
    with the 2 q^t reference bound reported alongside each tail row."""
    cfg = replace(cfg, experiment="displacement")
    rows: list[SweepRow] = []
    for cell_index, n, q in _cells(cfg):
        start = time.perf_counter()
        i = max(1, min(n, math.floor(cfg.i_frac * n + 0.5)))

        def trial_fn(seeds: np.ndarray) -> dict[str, np.ndarray]:
            v = sample_trace_matrix(n, q, seeds)
            p = v[:, i - 1].copy()
            for j in range(i + 1, n + 1):
                p += v[:, j - 1] <= p
            return {"disp": np.abs((n + 1 - p) - i)}

        data = _run_cell(cfg, cell_index, n, trial_fn)
        ms = (time.perf_counter() - start) * 1000.0
        disp = data["disp"]
        for t in cfg.t_list:
            mean, se = _mean_stderr((disp >= t).astype(np.float64))
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 f"disp_tail_t{t}", mean, se, None, ms))
            rows.append(SweepRow(cfg.experiment, n, q, cfg.alpha, cfg.trials,
                                 f"disp_bound_t{t}", min(1.0, 2.0 * q**t), None, None, ms))
    return _finalize(cfg, rows)


_RUNNERS = {
    "separator": run_separator_sweep,
    "width": run_width_sweep,
    "diameter": run_diameter_sweep,
    "expansion": run_expansion_check,
    "flush-validate": run_flush_validation,
    "displacement": run_displacement_sweep,
}


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Dispatch on cfg.experiment."""
    return _RUNNERS[cfg.experiment](cfg)


def _finalize(cfg: SweepConfig, rows: list[SweepRow]) -> SweepResult:
    rows.sort(key=lambda r: (r.n, r.q, r.stat))
    meta = {
        "experiment": cfg.experiment,
        "master_seed": cfg.master_seed,
        "code_version": CODE_VERSION,
        "rng": RNG_NAME,
        "alpha": cfg.alpha,
        "trials": cfg.trials,
        "thread_count": cfg.thread_count,
        "cwid_label": "upper-bound layout",
    }
    return SweepResult(cfg, rows, meta)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("experiment", "n", "q", "alpha", "trials", "stat",
               "mean", "stderr", "exact", "runtime_ms")


def _csv_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render_csv(result: SweepResult) -> str:
    """Deterministic CSV serialization; runtime_ms stays empty (see module doc)."""
    lines = [",".join(CSV_COLUMNS)]
    for r in result.rows:
        lines.append(
            ",".join(
                [
                    r.experiment,
                    str(r.n),
                    repr(float(r.q)),
                    repr(float(r.alpha)),
                    str(r.trials),
                    r.stat,
                    _csv_value(float(r.mean)),
                    _csv_value(r.stderr if r.stderr is None else float(r.stderr)),
                    _csv_value(r.exact if r.exact is None else float(r.exact)),
                    "",  # runtime_ms: deterministic output; measured value in JSON
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(result: SweepResult, path: str | Path) -> None:
    p = Path(path)
    try:
        p.write_text(render_csv(result))
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {p}: {exc}") from exc


def write_json(result: SweepResult, path: str | Path) -> None:
    """JSON mirror: same rows plus metadata and measured runtimes."""
    payload = {
        "metadata": result.metadata,
        "rows": [
            {
                "experiment": r.experiment,
                "n": r.n,
                "q": float(r.q),
                "alpha": float(r.alpha),
                "trials": r.trials,
                "stat": r.stat,
                "mean": float(r.mean),
                "stderr": None if r.stderr is None else float(r.stderr),
                "exact": None if r.exact is None else float(r.exact),
                "runtime_ms": None if r.runtime_ms is None else round(r.runtime_ms, 3),
                "within_band": r.within_band,
            }
            for r in result.rows
        ],
    }
    p = Path(path)
    try:
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write sweep JSON to {p}: {exc}") from exc


def write_plot_data(result: SweepResult, path: str | Path) -> None:
    """Gnuplot-ready blocks: one '# stat <name>' block per statistic with
    'n q mean stderr' columns, blocks separated by two blank lines."""
    stats = sorted({r.stat for r in result.rows})
    blocks = []
    for stat in stats:
        lines = [f"# stat {stat}", "# n q mean stderr"]
        for r in result.rows:
            if r.stat == stat:
                se = "" if r.stderr is None else repr(float(r.stderr))
                lines.append(f"{r.n} {repr(float(r.q))} {repr(float(r.mean))} {se}".rstrip())
        blocks.append("\n".join(lines))
    p = Path(path)
    try:
        p.write_text("\n\n\n".join(blocks) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {p}: {exc}") from exc


def check_bands(result: SweepResult) -> None:
    """Raise StatisticalCheckError listing every exact-reference row outside
    its 4*stderr band."""
    bad = result.failing_rows()
    if bad:
        desc = "; ".join(
            f"n={r.n} q={r.q:.6g} {r.stat}: mean={r.mean:.6g} exact={r.exact:.6g} stderr={r.stderr}"
            for r in bad
        )
        raise StatisticalCheckError(
            f"{len(bad)} sweep row(s) outside the 4*stderr band: {desc}", bad
        )
