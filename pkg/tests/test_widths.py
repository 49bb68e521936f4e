"""Treewidth, cutwidth, isoperimetric ratios, separators.

The exact solvers are cross-checked three ways: literal subset DP over
elimination sets (n <= 14), brute force over all orderings (n <= 7), and
known values for standard graphs.
"""

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tangledpath import (
    CapabilityError,
    build_tangled,
    build_width_report,
    boundary_subset_count,
    cutwidth_exact,
    cutwidth_identity,
    edge_iso,
    make_graph,
    mallows_process,
    parse_trace,
    sample_trace,
    standardize,
    treewidth_bounds,
    treewidth_exact,
    unit_separator,
    vertex_iso,
)
from tangledpath.rng import SplitMix64, derive
from conftest import (
    brute_cutwidth,
    brute_treewidth_orders,
    brute_vertex_iso,
    complete_graph,
    cycle_graph,
    grid_graph,
    path_graph,
    petersen_graph,
    random_connected_graph,
    reference_treewidth,
    star_graph,
)


def _tangled(n, q, seed):
    trace = sample_trace(n, q, seed)
    return build_tangled(mallows_process(trace), trace=trace)


# ---------------------------------------------------------------------------
# treewidth
# ---------------------------------------------------------------------------


def test_treewidth_knowns():
    assert treewidth_exact(make_graph(*path_graph(10))) == 1
    assert treewidth_exact(make_graph(*cycle_graph(6))) == 2
    assert treewidth_exact(make_graph(*complete_graph(5))) == 4
    assert treewidth_exact(make_graph(*grid_graph(3, 3))) == 3
    assert treewidth_exact(make_graph(*grid_graph(4, 4))) == 4
    assert treewidth_exact(make_graph(*petersen_graph())) == 4
    assert treewidth_exact(make_graph(3, [])) == 0


def test_treewidth_matches_reference_dp():
    for seed in range(20):
        n, edges = random_connected_graph(10, 5, 3000 + seed)
        assert treewidth_exact(make_graph(n, edges)) == reference_treewidth(n, edges)
    for seed in range(20):
        g = _tangled(12, 0.6, seed)
        assert treewidth_exact(g) == reference_treewidth(g.n, list(g.edges))


def test_treewidth_matches_brute_orders():
    for seed in range(8):
        n, edges = random_connected_graph(6, 4, 4000 + seed)
        want = brute_treewidth_orders(n, edges)
        assert treewidth_exact(make_graph(n, edges)) == want
        assert reference_treewidth(n, edges) == want


def test_treewidth_cap():
    with pytest.raises(CapabilityError):
        treewidth_exact(make_graph(*path_graph(21)))


def test_treewidth_bounds_sandwich():
    assert treewidth_bounds(make_graph(*complete_graph(6))) == (5, 5)
    assert treewidth_bounds(make_graph(*path_graph(100))) == (1, 1)
    for seed in range(30):
        g = _tangled(18, 0.7, 100 + seed)
        lo, hi = treewidth_bounds(g)
        assert lo <= treewidth_exact(g) <= hi


def test_subdivision_never_increases_treewidth():
    """Subdividing an edge leaves a topologically equivalent graph; its
    treewidth cannot go up."""
    rng = SplitMix64(77)
    for seed in range(50):
        n, edges = random_connected_graph(8 + seed % 5, 4, 7000 + seed)
        tw = treewidth_exact(make_graph(n, edges))
        u, v = edges[int(rng.uniform() * len(edges))]
        sub_edges = [e for e in edges if e != (u, v)] + [(u, n + 1), (v, n + 1)]
        assert treewidth_exact(make_graph(n + 1, sub_edges)) <= max(tw, 1)


def test_consecutive_pattern_monotonicity_small():
    rng = SplitMix64(5150)
    for trial in range(20):
        trace = sample_trace(9, 0.8, derive(31, trial))
        pi = mallows_process(trace)
        k = 3 + int(rng.uniform() * 3)
        start = int(rng.uniform() * (9 - k))
        pattern = standardize(pi.image[start : start + k])
        assert treewidth_exact(build_tangled(pattern)) <= treewidth_exact(
            build_tangled(pi)
        )


# ---------------------------------------------------------------------------
# cutwidth
# ---------------------------------------------------------------------------


def test_cutwidth_knowns():
    assert cutwidth_exact(make_graph(*path_graph(10))) == 1
    assert cutwidth_exact(make_graph(*complete_graph(5))) == 6
    assert cutwidth_exact(make_graph(*cycle_graph(6))) == 2
    assert cutwidth_exact(make_graph(*star_graph(4))) == 2


def test_cutwidth_matches_brute():
    for seed in range(10):
        n, edges = random_connected_graph(6, 5, 5000 + seed)
        assert cutwidth_exact(make_graph(n, edges)) == brute_cutwidth(n, edges)


def test_cutwidth_identity_profile():
    g = _tangled(15, 0.5, 8)
    width, profile = cutwidth_identity(g)
    assert len(profile) == g.n - 1
    for i in range(1, g.n):
        manual = sum(1 for u, v in g.edges if u <= i < v)
        assert profile[i - 1] == manual
    assert width == max(profile)
    assert cutwidth_exact(_tangled(12, 0.5, 8)) <= cutwidth_identity(_tangled(12, 0.5, 8))[0]


def test_cutwidth_identity_path():
    width, profile = cutwidth_identity(make_graph(*path_graph(10)))
    assert width == 1 and profile == (1,) * 9


# ---------------------------------------------------------------------------
# isoperimetric ratios
# ---------------------------------------------------------------------------


def test_iso_knowns():
    assert vertex_iso(make_graph(*path_graph(4))) == Fraction(1, 2)
    assert edge_iso(make_graph(*complete_graph(4))) == Fraction(2, 1)
    assert vertex_iso(make_graph(*cycle_graph(8))) == Fraction(1, 2)


def test_vertex_iso_matches_brute():
    for seed in range(12):
        n, edges = random_connected_graph(8, 4, 6000 + seed)
        assert vertex_iso(make_graph(n, edges)) == brute_vertex_iso(n, edges)


def test_iso_rejects_tiny():
    with pytest.raises(ValueError):
        vertex_iso(make_graph(1, []))


def test_width_chain_on_tangled_instances():
    """Expansion lower bound and the layout upper chain.

    A (s, 2/3)-separator (A, B, S) with |A| <= |B| has |A| between n/3 - s
    and n/2, and N(A) inside S, so iso <= s / (n/3 - s), giving
    s >= iso * n / (3 (1 + iso)); combined with s - 1 <= tw this is the
    correct form of the expansion-to-treewidth link (the stronger
    floor(iso * n) - 1 <= tw fails even on an 8-cycle, see below).
    """
    for trial in range(25):
        n = 6 + trial % 9
        g = _tangled(n, 0.7, derive(88, trial))
        iso = vertex_iso(g)
        tw = treewidth_exact(g)
        cw = cutwidth_exact(g)
        cwid, _ = cutwidth_identity(g)
        lower = math.ceil(iso * n / (3 * (1 + iso))) - 1
        assert lower <= tw <= cw <= cwid <= len(g.edges)


def test_iso_times_n_does_not_lower_bound_treewidth():
    """The unscaled inequality floor(iso * n) - 1 <= tw is false in general:
    C8 has iso = 1/2 and treewidth 2, but floor(4) - 1 = 3."""
    g = make_graph(*cycle_graph(8))
    assert vertex_iso(g) == Fraction(1, 2)
    assert treewidth_exact(g) == 2
    assert math.floor(vertex_iso(g) * 8) - 1 > treewidth_exact(g)


# ---------------------------------------------------------------------------
# separators and boundary counts
# ---------------------------------------------------------------------------


def test_unit_separator_goldens():
    # P9: smallest qualifying cut vertex is 3 (sides 2 and 6, both <= 6)
    assert unit_separator(make_graph(*path_graph(9)), 2 / 3) == (3, (2, 6))
    assert unit_separator(make_graph(*complete_graph(5)), 2 / 3) is None
    fig = parse_trace("1 1 3 2 1 1 1 3 2", 0.5)
    g = build_tangled(mallows_process(fig), trace=fig)
    k, (a, b) = unit_separator(g, 2 / 3)
    assert k == 5 and a + b == 8 and max(a, b) <= 6


def test_unit_separator_alpha_validation():
    with pytest.raises(ValueError):
        unit_separator(make_graph(*path_graph(5)), 0.4)


def test_boundary_subset_count_formula():
    assert boundary_subset_count(3, 1) == 4
    assert boundary_subset_count(5, 4) == 2
    with pytest.raises(ValueError):
        boundary_subset_count(5, 5)


@pytest.mark.parametrize("n", [2, 4, 7, 10])
def test_boundary_subset_count_matches_enumeration(n):
    """Count subsets of the path's vertices by exact edge-boundary size."""
    by_boundary = {}
    for bits in range(1 << n):
        cuts = sum(1 for i in range(n - 1) if ((bits >> i) & 1) != ((bits >> (i + 1)) & 1))
        by_boundary[cuts] = by_boundary.get(cuts, 0) + 1
    for k in range(1, n):
        assert boundary_subset_count(n, k) == by_boundary.get(k, 0)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def test_width_report_round_trip():
    g = _tangled(10, 0.5, 4)
    report = build_width_report(g, exact=True)
    doc = report.to_json()
    assert doc["n"] == 10
    assert doc["edges"] == len(g.edges)
    assert doc["treewidth"] == {"value": treewidth_exact(g), "method": "exact-dp"}
    assert doc["cutwidth_identity"]["value"] == cutwidth_identity(g)[0]
    assert "/" in doc["vertex_iso"]["value"]


def test_width_report_large_uses_bounds():
    g = _tangled(64, 0.5, 4)
    report = build_width_report(g)
    doc = report.to_json()
    lo, hi = treewidth_bounds(g)
    assert doc["treewidth"] == {
        "lower": lo,
        "upper": hi,
        "method": "degeneracy-lower/minfill-upper",
    }
    assert "cutwidth_exact" not in doc
