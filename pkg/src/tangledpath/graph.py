"""Tangled graphs and basic structure: construction, BFS, articulation points.

The tangled graph of a permutation sigma of {1..n} is the union of the path
1-2-...-n with the permuted path sigma(1)-sigma(2)-...-sigma(n), with duplicate
edges collapsed.  It is always connected (it contains the path), has at most
2(n-1) edges, and maximum degree at most 4.  Reversing sigma produces the same
graph, which is why process outputs r_n can be used without reversal.

Structural functions here accept either a :class:`TangledGraph` or a plain
``(n, edges)`` pair with 1-based vertices, so they also apply to the reference
graphs (paths, cycles, cliques) used when validating the width machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path as _sp_shortest_path

from .mallows import InsertionTrace, Permutation, mallows_process

GraphLike = "TangledGraph | tuple[int, Iterable[tuple[int, int]]]"

# Above this size diameter() switches from the pure-Python BFS loop to
# scipy.sparse.csgraph; both routes are exact and the tests compare them.
_SPARSE_DIAMETER_CUTOVER = 256


@dataclass(frozen=True)
class TangledGraph:
    """An undirected graph on {1..n} with sorted, deduplicated edges."""

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    provenance: dict | None = None

    def degree(self, v: int) -> int:
        return len(self.adjacency[v - 1])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v - 1]


def _normalize(g) -> tuple[int, list[tuple[int, int]]]:
    """Accept a TangledGraph or an (n, edges) pair; return clean 1-based edges."""
    if isinstance(g, TangledGraph):
        return g.n, list(g.edges)
    n, raw = g
    n = int(n)
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    seen: set[tuple[int, int]] = set()
    for u, v in raw:
        u, v = int(u), int(v)
        if not (1 <= u <= n and 1 <= v <= n):
            raise ValueError(f"edge ({u}, {v}) outside vertex range 1..{n}")
        if u == v:
            raise ValueError(f"self-loop at {u}")
        seen.add((min(u, v), max(u, v)))
    return n, sorted(seen)


def adjacency_lists(g) -> tuple[int, list[list[int]]]:
    """0-based adjacency lists (index v-1 for vertex v), neighbors sorted."""
    n, edges = _normalize(g)
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u - 1].append(v - 1)
        adj[v - 1].append(u - 1)
    for lst in adj:
        lst.sort()
    return n, adj


def make_graph(n: int, edges: Iterable[tuple[int, int]]) -> TangledGraph:
    """Build a TangledGraph-shaped value from an arbitrary edge list."""
    n, clean = _normalize((n, edges))
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in clean:
        adj[u - 1].append(v)
        adj[v - 1].append(u)
    return TangledGraph(
        n, tuple(clean), tuple(tuple(sorted(a)) for a in adj), None
    )


def build_tangled(
    sigma: Permutation | Sequence[int],
    trace: InsertionTrace | None = None,
) -> TangledGraph:
    """Union of the path on 1..n with the sigma-permuted path.

    Duplicate edges collapse, so the edge count is at most 2(n-1); every vertex
    keeps degree at most 4 (two path neighbors, two permuted-path neighbors).
    An optional trace is recorded as provenance.
    """
    img = sigma.image if isinstance(sigma, Permutation) else tuple(int(x) for x in sigma)
    n = len(img)
    if sorted(img) != list(range(1, n + 1)):
        raise ValueError("sigma is not a permutation of 1..n")
    edges = {(i, i + 1) for i in range(1, n)}
    for a, b in zip(img, img[1:]):
        edges.add((min(a, b), max(a, b)))
    prov = None
    if trace is not None:
        prov = {"positions": trace.positions, "q": trace.q, "seed": trace.seed}
    base = make_graph(n, edges)
    return TangledGraph(base.n, base.edges, base.adjacency, prov)


def graph_from_trace(trace: InsertionTrace | Sequence[int]) -> TangledGraph:
    """Tangled graph of the process output of ``trace`` (reversal-invariant)."""
    sigma = mallows_process(trace)
    return build_tangled(sigma, trace if isinstance(trace, InsertionTrace) else None)


# ---------------------------------------------------------------------------
# traversal
# ---------------------------------------------------------------------------


def bfs_distances(g, source: int) -> list[int]:
    """Hop distances from ``source`` (1-based); -1 marks unreachable vertices."""
    n, adj = adjacency_lists(g)
    if not 1 <= source <= n:
        raise ValueError(f"source {source} outside 1..{n}")
    dist = [-1] * n
    dist[source - 1] = 0
    frontier = [source - 1]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def is_connected(g) -> bool:
    n, _ = _normalize(g)
    return -1 not in bfs_distances(g, 1) if n > 0 else True


def _csr(g) -> csr_matrix:
    n, edges = _normalize(g)
    if not edges:
        return csr_matrix((n, n))
    rows = [u - 1 for u, v in edges] + [v - 1 for u, v in edges]
    cols = [v - 1 for u, v in edges] + [u - 1 for u, v in edges]
    data = np.ones(len(rows), dtype=np.int8)
    return csr_matrix((data, (rows, cols)), shape=(n, n))


def diameter(g, method: str = "auto") -> int:
    """Exact diameter (max eccentricity); requires a connected graph.

    ``method`` selects the route: "bfs" runs the in-package BFS from every
    vertex, "sparse" delegates the all-pairs pass to scipy.sparse.csgraph,
    "auto" picks by size.  Both are exact; the tests cross-check them.
    """
    n, _ = _normalize(g)
    if n == 1:
        return 0
    if method == "auto":
        method = "sparse" if n > _SPARSE_DIAMETER_CUTOVER else "bfs"
    if method == "bfs":
        best = 0
        for s in range(1, n + 1):
            dist = bfs_distances(g, s)
            if -1 in dist:
                raise ValueError("diameter of a disconnected graph is undefined")
            best = max(best, max(dist))
        return best
    if method == "sparse":
        dm = _sp_shortest_path(_csr(g), method="D", unweighted=True, directed=False)
        if np.isinf(dm).any():
            raise ValueError("diameter of a disconnected graph is undefined")
        return int(dm.max())
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# articulation points
# ---------------------------------------------------------------------------


def articulation_points(g) -> set[int]:
    """Cut vertices of a connected graph, via one iterative lowpoint DFS.

    Disconnected input is a domain error: articulation structure of separate
    components is not what callers of this package mean.
    """
    n, adj = adjacency_lists(g)
    if n == 0:
        return set()
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    child_count = [0] * n
    is_cut = [False] * n
    timer = 0

    # Explicit stack of (vertex, neighbor iterator index) so deep path-like
    # graphs never hit the recursion limit.
    stack: list[tuple[int, int]] = [(0, 0)]
    disc[0] = low[0] = timer
    timer += 1
    while stack:
        u, ptr = stack[-1]
        if ptr < len(adj[u]):
            stack[-1] = (u, ptr + 1)
            w = adj[u][ptr]
            if disc[w] < 0:
                parent[w] = u
                child_count[u] += 1
                disc[w] = low[w] = timer
                timer += 1
                stack.append((w, 0))
            elif w != parent[u]:
                low[u] = min(low[u], disc[w])
        else:
            stack.pop()
            p = parent[u]
            if p >= 0:
                low[p] = min(low[p], low[u])
                if parent[p] >= 0 and low[u] >= disc[p]:
                    is_cut[p] = True
    if -1 in disc:
        raise ValueError("articulation points require a connected graph")
    if child_count[0] >= 2:
        is_cut[0] = True
    return {v + 1 for v in range(n) if is_cut[v]}


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def format_edge_list(g) -> str:
    """'n=<n>' on the first line, then one sorted 'u v' pair per line."""
    n, edges = _normalize(g)
    lines = [f"n={n}"]
    lines.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(lines)


def parse_edge_list(text: str) -> TangledGraph:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("edge list must start with an 'n=<count>' line")
    n = int(lines[0][2:])
    edges = []
    for ln in lines[1:]:
        u, v = ln.split()
        edges.append((int(u), int(v)))
    return make_graph(n, edges)
