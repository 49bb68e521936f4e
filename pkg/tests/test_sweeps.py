"""Monte Carlo sweep harness: configs, determinism, bands, output formats."""

import dataclasses
import json
import math

import pytest

from tangledpath import (
    StatisticalCheckError,
    flush_prob,
    threshold_window,
)
from tangledpath.sweeps import (
    CSV_COLUMNS,
    SweepConfig,
    check_bands,
    config_from_file,
    make_config,
    parse_config_text,
    render_csv,
    resolve_q_token,
    run_sweep,
    write_csv,
    write_json,
    write_plot_data,
    _chunk_bounds,
)


def small_cfg(**over):
    base = dict(
        experiment="separator",
        n_list=[30],
        q_grid=[0.0, 0.5],
        trials=40,
        master_seed=7,
    )
    base.update(over)
    return make_config(**base)


# --- configuration parsing ---


def test_parse_key_value_config():
    cfg = parse_config_text(
        """
        # comment line
        experiment = separator
        n_list = 50, 100
        q_grid = 0.3, 0.6
        trials = 25
        master_seed = 99
        alpha = 0.6
        """
    )
    assert cfg.experiment == "separator"
    assert cfg.n_list == (50, 100)
    assert cfg.q_grid == (0.3, 0.6)
    assert cfg.trials == 25
    assert cfg.master_seed == 99
    assert cfg.alpha == 0.6


def test_parse_json_config():
    cfg = parse_config_text(
        json.dumps(
            {
                "experiment": "width",
                "n_list": [12],
                "q_grid": ["critical"],
                "trials": 5,
            }
        )
    )
    assert cfg.experiment == "width"
    assert cfg.q_grid == ("critical",)


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        make_config(experiment="nope", n_list=[10], q_grid=[0.5])
    with pytest.raises(ValueError):
        small_cfg(trials=0)
    with pytest.raises(ValueError):
        small_cfg(q_grid=[1.5])
    with pytest.raises(ValueError):
        small_cfg(q_grid=[])
    with pytest.raises(ValueError):
        small_cfg(alpha=0.4)
    with pytest.raises(ValueError):
        parse_config_text("experiment = separator\nn_list = 10\nbogus_key = 1\n")


def test_config_from_file(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text("experiment = diameter\nn_list = 40\nq_grid = 0.0\ntrials = 3\n")
    cfg = config_from_file(path)
    assert cfg.experiment == "diameter"
    assert cfg.n_list == (40,)


# --- q-grid window tokens ---


def test_q_tokens_resolve_via_threshold_window():
    n = 10**5
    win = threshold_window(n, 3.0)
    assert resolve_q_token("critical", n) == [win.q_critical]
    assert resolve_q_token("critical-3margin", n) == [win.q_exist]
    assert resolve_q_token("critical+3margin", n) == [win.q_nonexist]
    both = resolve_q_token("critical+-3margin", n)
    assert both == [win.q_exist, win.q_nonexist]
    assert resolve_q_token("critical-+3margin", n) == both
    assert resolve_q_token("critical+-3*margin", n) == both
    assert resolve_q_token(0.25, n) == [0.25]


def test_q_tokens_reject_garbage():
    for bad in ("critical~3margin", "crit", "critical+margin3", "q=0.5"):
        with pytest.raises(ValueError):
            resolve_q_token(bad, 10**5)


# --- determinism ---


def test_thread_count_does_not_change_csv():
    base = small_cfg(thread_count=1)
    threaded = dataclasses.replace(base, thread_count=3)
    csv_one = render_csv(run_sweep(base))
    csv_three = render_csv(run_sweep(threaded))
    assert csv_one == csv_three


def test_seed_changes_results():
    a = render_csv(run_sweep(small_cfg(master_seed=1, q_grid=[0.7])))
    b = render_csv(run_sweep(small_cfg(master_seed=2, q_grid=[0.7])))
    assert a != b


def test_chunk_bounds_cover_and_ignore_threads():
    for trials in (1, 7, 64, 1000):
        for n in (10, 5000):
            bounds = _chunk_bounds(trials, n)
            assert bounds[0][0] == 0 and bounds[-1][1] == trials
            for (a, b), (c, d) in zip(bounds, bounds[1:]):
                assert b == c and a < b
    # chunking depends on (trials, n) only, so there is nothing thread-shaped
    assert _chunk_bounds(100, 50) == _chunk_bounds(100, 50)


# --- row content ---


def test_q_zero_rows_are_exact():
    res = run_sweep(small_cfg(q_grid=[0.0], trials=10))
    by_stat = {row.stat: row for row in res.rows}
    cuts = by_stat["cut_count"]
    assert cuts.stderr == 0.0
    assert cuts.mean == cuts.exact
    assert by_stat["separator_prob"].mean == 1.0


def test_diameter_q_zero_exact():
    res = run_sweep(
        make_config(
            experiment="diameter", n_list=[25], q_grid=[0.0], trials=5, master_seed=3
        )
    )
    diam = next(r for r in res.rows if r.stat == "diameter")
    assert diam.mean == 24.0 and diam.exact == 24.0
    viol = next(r for r in res.rows if r.stat == "diambound_violations")
    assert viol.mean == 0.0 and viol.exact == 0.0


def test_exhaustive_flush_validation_matches_closed_form():
    cfg = make_config(
        experiment="flush-validate",
        n_list=[6],
        q_grid=[0.45],
        k_fracs=[0.5],
        exhaustive=True,
    )
    res = run_sweep(cfg)
    row = next(r for r in res.rows if r.stat.startswith("flush_freq"))
    assert row.stderr == 0.0
    assert row.mean == pytest.approx(flush_prob(6, 3, 0.45), abs=1e-10)
    assert row.mean == pytest.approx(row.exact, abs=1e-10)


def test_flush_validation_monte_carlo_band():
    cfg = make_config(
        experiment="flush-validate",
        n_list=[40],
        q_grid=[0.5],
        k_fracs=[0.5],
        trials=400,
        master_seed=11,
    )
    res = run_sweep(cfg)
    row = next(r for r in res.rows if r.stat == "flush_freq_k20")
    assert row.exact == pytest.approx(flush_prob(40, 20, 0.5), rel=1e-12)
    assert row.within_band
    check_bands(res)


def test_displacement_rows_have_bound_columns():
    cfg = make_config(
        experiment="displacement",
        n_list=[30],
        q_grid=[0.6],
        trials=50,
        t_list=[1, 2, 3],
        master_seed=5,
    )
    res = run_sweep(cfg)
    stats = {r.stat for r in res.rows}
    assert {"disp_tail_t1", "disp_tail_t3", "disp_bound_t2"} <= stats
    bound = next(r for r in res.rows if r.stat == "disp_bound_t2")
    assert bound.mean == pytest.approx(min(1.0, 2 * 0.6**2))
    tail = next(r for r in res.rows if r.stat == "disp_tail_t2")
    assert tail.mean <= bound.mean + 4 * (tail.stderr or 0.0) + 1e-9


# --- output formats ---


def test_csv_layout(tmp_path):
    res = run_sweep(small_cfg())
    text = render_csv(res)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    for line in lines[1:]:
        parts = line.split(",")
        assert len(parts) == len(CSV_COLUMNS)
        assert parts[-1] == ""  # runtime_ms stays empty for reproducibility
    keys = [(int(p[1]), float(p[2]), p[5]) for p in (l.split(",") for l in lines[1:])]
    assert keys == sorted(keys)
    out = tmp_path / "rows.csv"
    write_csv(res, out)
    assert out.read_text() == text


def test_json_mirror_has_runtimes(tmp_path):
    res = run_sweep(small_cfg(trials=8))
    path = tmp_path / "rows.json"
    write_json(res, path)
    doc = json.loads(path.read_text())
    assert doc["metadata"]["rng"] == "splitmix64"
    assert doc["metadata"]["master_seed"] == 7
    assert len(doc["rows"]) == len(res.rows)
    assert all(isinstance(r["runtime_ms"], float) for r in doc["rows"])
    assert all("within_band" in r for r in doc["rows"])


def test_plot_data_blocks(tmp_path):
    res = run_sweep(small_cfg(trials=8))
    path = tmp_path / "rows.dat"
    write_plot_data(res, path)
    text = path.read_text()
    stats = sorted({row.stat for row in res.rows})
    for stat in stats:
        assert f"# stat {stat}" in text
    assert "\n\n\n" in text  # gnuplot index separator between blocks


def test_check_bands_raises_on_doctored_row():
    res = run_sweep(small_cfg(trials=30, q_grid=[0.5]))
    check_bands(res)
    bad = dataclasses.replace(
        res.rows[0], exact=(res.rows[0].exact or 0.0) + 25.0, within_band=False
    )
    doctored = dataclasses.replace(res, rows=[bad] + list(res.rows[1:]))
    with pytest.raises(StatisticalCheckError) as err:
        check_bands(doctored)
    assert err.value.rows


def test_width_sweep_medians_present():
    cfg = make_config(
        experiment="width", n_list=[12], q_grid=[0.0, 0.6], trials=6, master_seed=2
    )
    res = run_sweep(cfg)
    stats = {r.stat for r in res.rows}
    assert "cwid_median" in stats and "tw_median" in stats
    q0 = next(r for r in res.rows if r.q == 0.0 and r.stat == "tw_median")
    assert q0.mean == 1.0 and q0.exact == 1.0


def test_expansion_check_small_instance():
    cfg = make_config(
        experiment="expansion", n_list=[12], q_grid=[1.0], trials=10, master_seed=4
    )
    res = run_sweep(cfg)
    stats = {r.stat for r in res.rows}
    assert "vertex_iso_min" in stats and "iso_ge_1_40_frac" in stats
    frac = next(r for r in res.rows if r.stat == "iso_ge_1_40_frac")
    assert 0.0 <= frac.mean <= 1.0
