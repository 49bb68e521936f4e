"""Exact width parameters at desk scale: treewidth, cutwidth, isoperimetry.

Exact solvers (treewidth_exact, cutwidth_exact, vertex_iso, edge_iso) cap at
n = 20 and refuse larger inputs with :class:`CapabilityError` so callers always
know which numbers are exact.  treewidth_bounds and cutwidth_identity work at
any size and feed the trend sweeps.

The chain these quantities satisfy on every instance (max degree <= 4 graphs):

    floor(vertex_iso * n) - 1  <=  treewidth  <=  cutwidth  <=  |E|

with cutwidth_exact <= cutwidth_identity, since the identity layout is just one
candidate vertex ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from ._util import balanced_at_most
from .errors import CapabilityError
from .graph import _normalize, adjacency_lists, articulation_points

EXACT_CAP = 20

# treewidth_bounds runs min-fill, which is cubic-ish with fill-in; this soft cap
# keeps the "any n" contract honest about what finishes at a desk.
BOUNDS_CAP = 1024


def _require_small(n: int, what: str) -> None:
    if n > EXACT_CAP:
        raise CapabilityError(
            f"{what} is exact-only and supports n <= {EXACT_CAP}; "
            f"got n={n} (use treewidth_bounds / cutwidth_identity at this size)"
        )


def _bitmask_adjacency(n: int, edges: list[tuple[int, int]]) -> list[int]:
    adj = [0] * n
    for u, v in edges:
        adj[u - 1] |= 1 << (v - 1)
        adj[v - 1] |= 1 << (u - 1)
    return adj


# ---------------------------------------------------------------------------
# treewidth
# ---------------------------------------------------------------------------


def _is_forest(n: int, edges: list[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u - 1), find(v - 1)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def _series_reduce(n: int, edges: list[tuple[int, int]]) -> list[dict[int, set[int]]]:
    """Strip degree <= 2 vertices (valid once tw >= 2) and split into cores.

    Degree-0/1 removal never changes treewidth; contracting a degree-2 vertex
    preserves it as long as the graph keeps treewidth >= 2, which the caller
    guarantees by only reducing graphs that contain a cycle.  Returns the
    connected components of the residue, each with minimum degree >= 3.
    """
    nbrs: dict[int, set[int]] = {v: set() for v in range(n)}
    for u, v in edges:
        nbrs[u - 1].add(v - 1)
        nbrs[v - 1].add(u - 1)
    queue = [v for v, ns in nbrs.items() if len(ns) <= 2]
    while queue:
        v = queue.pop()
        if v not in nbrs or len(nbrs[v]) > 2:
            continue
        ns = nbrs.pop(v)
        for a in ns:
            nbrs[a].discard(v)
        if len(ns) == 2:
            a, b = ns
            if b not in nbrs[a]:
                nbrs[a].add(b)
                nbrs[b].add(a)
        for a in ns:
            if a in nbrs and len(nbrs[a]) <= 2:
                queue.append(a)

    cores: list[dict[int, set[int]]] = []
    todo = set(nbrs)
    while todo:
        start = todo.pop()
        comp = {start}
        frontier = [start]
        while frontier:
            x = frontier.pop()
            for y in nbrs[x]:
                if y not in comp:
                    comp.add(y)
                    frontier.append(y)
        todo -= comp
        cores.append({v: set(nbrs[v]) for v in comp})
    return cores


def _degeneracy(nbrs: dict[int, set[int]]) -> int:
    work = {v: set(ns) for v, ns in nbrs.items()}
    best = 0
    while work:
        v = min(work, key=lambda x: (len(work[x]), x))
        best = max(best, len(work[v]))
        for a in work[v]:
            work[a].discard(v)
        del work[v]
    return best


def _minfill_width(nbrs: dict[int, set[int]]) -> int:
    """Width of the greedy minimum-fill elimination order (treewidth upper bound)."""
    work = {v: set(ns) for v, ns in nbrs.items()}
    width = 0
    while work:
        best_v, best_key = -1, None
        for v, ns in work.items():
            lst = list(ns)
            fill = sum(
                1
                for i, a in enumerate(lst)
                for b in lst[i + 1 :]
                if b not in work[a]
            )
            key = (fill, len(ns), v)
            if best_key is None or key < best_key:
                best_v, best_key = v, key
        ns = work.pop(best_v)
        width = max(width, len(ns))
        for a in ns:
            work[a].discard(best_v)
            work[a].update(ns - {a})
    return width


def _elimination_cost(adj: list[int], elim: int, v: int) -> int:
    """Degree of v after eliminating the set ``elim``: neighbors reachable from
    v through eliminated vertices only.  Equivalent to v's clique size in the
    fill graph, without maintaining fill edges."""
    comp = 1 << v
    reach = adj[v]
    while True:
        grow = reach & elim & ~comp
        if not grow:
            break
        comp |= grow
        m = grow
        while m:
            b = m & -m
            reach |= adj[b.bit_length() - 1]
            m ^= b
    return (reach & ~elim & ~(1 << v)).bit_count()


def _tw_decide(adj: list[int], t: int) -> bool:
    """Is there an elimination order of width <= t?  Memoized depth-first
    search over eliminated-subset states."""
    n = len(adj)
    full = (1 << n) - 1
    failed: set[int] = set()

    def dfs(elim: int, remaining: int) -> bool:
        if remaining <= t + 1:
            return True
        if elim in failed:
            return False
        rest = full & ~elim
        costs: list[tuple[int, int]] = []
        m = rest
        while m:
            b = m & -m
            v = b.bit_length() - 1
            m ^= b
            c = _elimination_cost(adj, elim, v)
            if c <= 1:
                # A vertex of fill-degree <= 1 is simplicial; eliminating it
                # first never hurts, so commit without branching.
                ok = dfs(elim | (1 << v), remaining - 1)
                if not ok:
                    failed.add(elim)
                return ok
            costs.append((c, v))
        costs.sort()
        for c, v in costs:
            if c > t:
                break
            if dfs(elim | (1 << v), remaining - 1):
                return True
        failed.add(elim)
        return False

    return dfs(0, n)


def treewidth_exact(g) -> int:
    """Exact treewidth for n <= 20.

    Forests are answered directly; otherwise degree <= 2 reductions shrink the
    graph, and each residual core is solved by iterative deepening on the
    elimination-order decision problem (memoized over vertex subsets).
    """
    n, edges = _normalize(g)
    _require_small(n, "treewidth_exact")
    if not edges:
        return 0
    if _is_forest(n, edges):
        return 1
    best = 2
    for core in _series_reduce(n, edges):
        if not core:
            continue
        labels = sorted(core)
        index = {v: i for i, v in enumerate(labels)}
        adj = [0] * len(labels)
        for v, ns in core.items():
            for w in ns:
                adj[index[v]] |= 1 << index[w]
        lb = max(3, _degeneracy(core))
        ub = _minfill_width(core)
        ans = ub
        for t in range(lb, ub):
            if _tw_decide(adj, t):
                ans = t
                break
        best = max(best, ans)
    return best


def treewidth_bounds(g) -> tuple[int, int]:
    """(degeneracy lower bound, min-fill upper bound); brackets the exact value."""
    n, edges = _normalize(g)
    if n > BOUNDS_CAP:
        raise CapabilityError(
            f"treewidth_bounds supports n <= {BOUNDS_CAP}; got n={n}"
        )
    if not edges:
        return 0, 0
    nbrs: dict[int, set[int]] = {v: set() for v in range(n)}
    for u, v in edges:
        nbrs[u - 1].add(v - 1)
        nbrs[v - 1].add(u - 1)
    return _degeneracy(nbrs), _minfill_width(nbrs)


# ---------------------------------------------------------------------------
# cutwidth
# ---------------------------------------------------------------------------


def cutwidth_exact(g) -> int:
    """Minimum over all vertex orderings of the maximum cut, for n <= 20.

    Subset DP: cost(S) = max(boundary(S), min over v in S of cost(S - v)),
    where boundary(S) counts edges between S and its complement.  Evaluated
    layer by layer over subset popcounts with vectorized gathers.
    """
    n, edges = _normalize(g)
    _require_small(n, "cutwidth_exact")
    if n == 1 or not edges:
        return 0
    size = 1 << n
    masks = np.arange(size, dtype=np.uint32)
    boundary = np.zeros(size, dtype=np.int32)
    for u, v in edges:
        crossing = (masks >> np.uint32(u - 1)) ^ (masks >> np.uint32(v - 1))
        boundary += (crossing & np.uint32(1)).astype(np.int32)
    pop = np.bitwise_count(masks)
    cost = np.zeros(size, dtype=np.int32)
    big = np.int32(2**30)
    for layer in range(1, n + 1):
        idx = np.nonzero(pop == layer)[0]
        cand = np.full(idx.size, big, dtype=np.int32)
        for v in range(n):
            sel = ((idx >> v) & 1).astype(bool)
            if not sel.any():
                continue
            cand[sel] = np.minimum(cand[sel], cost[idx[sel] ^ (1 << v)])
        cost[idx] = np.maximum(boundary[idx], cand)
    return int(cost[size - 1])


def cutwidth_identity(g) -> tuple[int, tuple[int, ...]]:
    """Cut profile of the layout 1, 2, ..., n: value at x = i + 0.5 counts the
    edges {u, v} with u <= i < v.  Returns (max, per-cut profile)."""
    n, edges = _normalize(g)
    if n == 1:
        return 0, ()
    diff = [0] * (n + 1)
    for u, v in edges:
        diff[u] += 1
        diff[v] -= 1
    profile = []
    running = 0
    for i in range(1, n):
        running += diff[i]
        profile.append(running)
    return (max(profile) if profile else 0), tuple(profile)


# ---------------------------------------------------------------------------
# isoperimetric numbers
# ---------------------------------------------------------------------------


def _subset_tables(n: int, edges: list[tuple[int, int]]):
    masks = np.arange(1 << n, dtype=np.uint32)
    sizes = np.bitwise_count(masks).astype(np.int64)
    return masks, sizes


def vertex_iso(g) -> Fraction:
    """min over 0 < |S| <= n/2 of |N(S) \\ S| / |S|, as an exact rational."""
    n, edges = _normalize(g)
    _require_small(n, "vertex_iso")
    if n < 2:
        raise ValueError("isoperimetric ratio needs at least 2 vertices")
    masks, sizes = _subset_tables(n, edges)
    adjm = _bitmask_adjacency(n, edges)
    nb = np.zeros(1 << n, dtype=np.uint32)
    for v in range(n):
        sel = ((masks >> np.uint32(v)) & np.uint32(1)).astype(bool)
        nb[sel] |= np.uint32(adjm[v])
    outside = np.bitwise_count(nb & ~masks).astype(np.int64)
    per_size = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(per_size, sizes, outside)
    return min(
        Fraction(int(per_size[s]), s)
        for s in range(1, n // 2 + 1)
    )


def edge_iso(g) -> Fraction:
    """min over 0 < |S| <= n/2 of (edges leaving S) / |S|, as an exact rational."""
    n, edges = _normalize(g)
    _require_small(n, "edge_iso")
    if n < 2:
        raise ValueError("isoperimetric ratio needs at least 2 vertices")
    masks, sizes = _subset_tables(n, edges)
    crossing = np.zeros(1 << n, dtype=np.int64)
    for u, v in edges:
        x = (masks >> np.uint32(u - 1)) ^ (masks >> np.uint32(v - 1))
        crossing += (x & np.uint32(1)).astype(np.int64)
    per_size = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(per_size, sizes, crossing)
    return min(
        Fraction(int(per_size[s]), s)
        for s in range(1, n // 2 + 1)
    )


# ---------------------------------------------------------------------------
# separators and boundary counting
# ---------------------------------------------------------------------------


def unit_separator(g, alpha: float) -> tuple[int, tuple[int, int]] | None:
    """Smallest cut vertex k whose removal splits g into sides each <= alpha*n.

    The removed components may be grouped into two parts; the returned side
    sizes are the achievable split closest to even.  For tangled graphs the
    parts are always {1..k-1} and {k+1..n}.  Returns None when no cut vertex
    qualifies.
    """
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"alpha={alpha} outside (1/2, 1)")
    n, adj = adjacency_lists(g)
    for k in sorted(articulation_points(g)):
        comp_sizes = []
        seen = [False] * n
        seen[k - 1] = True
        for start in range(n):
            if seen[start]:
                continue
            count = 0
            frontier = [start]
            seen[start] = True
            while frontier:
                x = frontier.pop()
                count += 1
                for y in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        frontier.append(y)
            comp_sizes.append(count)
        reachable = 1
        for s in comp_sizes:
            reachable |= reachable << s
        total = n - 1
        best: int | None = None
        for a in range(total + 1):
            if not (reachable >> a) & 1:
                continue
            if not balanced_at_most(a, n, alpha):
                continue
            if not balanced_at_most(total - a, n, alpha):
                continue
            if best is None or abs(2 * a - total) < abs(2 * best - total) or (
                abs(2 * a - total) == abs(2 * best - total) and a < best
            ):
                best = a
        if best is not None:
            return k, (min(best, total - best), max(best, total - best))
    return None


def boundary_subset_count(n: int, k: int) -> int:
    """Upper bound 2*C(n-1, k) on the number of vertex subsets of the path P_n
    whose edge boundary has exactly k edges."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside [1, {n - 1}]")
    return 2 * math.comb(n - 1, k)


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------


@dataclass
class WidthReport:
    """Widths of one graph with per-entry method provenance.

    ``treewidth`` is an exact int when the solver ran, else a (lower, upper)
    pair from the bounds route; iso entries stay exact rationals so chain
    arithmetic like floor(iso * n) never sees float rounding.
    """

    n: int
    edge_count: int
    treewidth: int | tuple[int, int]
    treewidth_method: str
    cutwidth_identity: int
    cutwidth_profile: tuple[int, ...]
    cutwidth_exact: int | None = None
    vertex_iso: Fraction | None = None
    edge_iso: Fraction | None = None

    def to_json(self) -> dict:
        out: dict = {
            "n": self.n,
            "edges": self.edge_count,
            "cutwidth_identity": {
                "value": self.cutwidth_identity,
                "method": "identity-layout",
            },
        }
        if isinstance(self.treewidth, tuple):
            out["treewidth"] = {
                "lower": self.treewidth[0],
                "upper": self.treewidth[1],
                "method": "degeneracy-lower/minfill-upper",
            }
        else:
            out["treewidth"] = {"value": self.treewidth, "method": self.treewidth_method}
        if self.cutwidth_exact is not None:
            out["cutwidth_exact"] = {"value": self.cutwidth_exact, "method": "exact-dp"}
        if self.vertex_iso is not None:
            out["vertex_iso"] = {
                "value": f"{self.vertex_iso.numerator}/{self.vertex_iso.denominator}",
                "method": "exact-dp",
            }
        if self.edge_iso is not None:
            out["edge_iso"] = {
                "value": f"{self.edge_iso.numerator}/{self.edge_iso.denominator}",
                "method": "exact-dp",
            }
        return out


def build_width_report(g, exact: bool | None = None) -> WidthReport:
    """Compute the widths that are feasible at |g|'s size.

    ``exact=None`` picks exact solvers iff n <= 20; True forces them (refusing
    beyond the cap); False forces the bounds route.
    """
    n, edges = _normalize(g)
    use_exact = n <= EXACT_CAP if exact is None else exact
    cw_val, cw_profile = cutwidth_identity(g)
    if use_exact:
        return WidthReport(
            n=n,
            edge_count=len(edges),
            treewidth=treewidth_exact(g),
            treewidth_method="exact-dp",
            cutwidth_identity=cw_val,
            cutwidth_profile=cw_profile,
            cutwidth_exact=cutwidth_exact(g),
            vertex_iso=vertex_iso(g) if n >= 2 else None,
            edge_iso=edge_iso(g) if n >= 2 else None,
        )
    return WidthReport(
        n=n,
        edge_count=len(edges),
        treewidth=treewidth_bounds(g),
        treewidth_method="degeneracy-lower/minfill-upper",
        cutwidth_identity=cw_val,
        cutwidth_profile=cw_profile,
    )
