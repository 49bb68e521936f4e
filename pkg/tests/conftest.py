"""Shared graph builders and slow-but-obvious reference oracles.

The oracles here are deliberately written in the most literal style possible
(double loops over definitions, exhaustive subset or ordering enumeration) so
that agreement with the fast library implementations is meaningful.
"""

from __future__ import annotations

import itertools

from tangledpath import SplitMix64


# ---------------------------------------------------------------------------
# graph builders (n, edge list) in the library's 1-based convention
# ---------------------------------------------------------------------------


def path_graph(n):
    return n, [(i, i + 1) for i in range(1, n)]


def cycle_graph(n):
    return n, [(i, i + 1) for i in range(1, n)] + [(1, n)]


def complete_graph(n):
    return n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def star_graph(leaves):
    return leaves + 1, [(1, i) for i in range(2, leaves + 2)]


def grid_graph(rows, cols):
    def vid(r, c):
        return r * cols + c + 1

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return rows * cols, edges


def petersen_graph():
    outer = [(i + 1, (i + 1) % 5 + 1) for i in range(5)]
    spokes = [(i + 1, i + 6) for i in range(5)]
    inner = [(i + 6, (i + 2) % 5 + 6) for i in range(5)]
    return 10, outer + spokes + inner


def random_connected_graph(n, extra_edges, seed):
    """Random spanning tree plus `extra_edges` random chords."""
    rng = SplitMix64(seed)
    edges = set()
    for v in range(2, n + 1):
        u = 1 + int(rng.uniform() * (v - 1))
        edges.add((min(u, v), max(u, v)))
    attempts = 0
    while len(edges) < n - 1 + extra_edges and attempts < 50 * (extra_edges + 1):
        attempts += 1
        u = 1 + int(rng.uniform() * n)
        v = 1 + int(rng.uniform() * n)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return n, sorted(edges)


# ---------------------------------------------------------------------------
# event oracle: literal definitions, one k at a time
# ---------------------------------------------------------------------------


def naive_flush(v, k):
    n = len(v)
    return all(i - v[i - 1] >= k for i in range(k + 1, n + 1))


def naive_reverse_flush(v, k):
    n = len(v)
    return all(v[i - 1] > k for i in range(k + 1, n + 1))


def naive_cut_forward(v, k):
    return naive_flush(v, k) and v[k - 1] == 1


def naive_cut_reverse(v, k):
    return naive_reverse_flush(v, k) and v[k - 1] == k


def naive_cut_set(v):
    n = len(v)
    return {
        k
        for k in range(2, n)
        if naive_cut_forward(v, k) or naive_cut_reverse(v, k)
    }


def naive_sparse_flush(v, k, b, ell):
    """Try every b-subset of the window; exponential, for tiny windows only."""
    n = len(v)
    window = range(k, min(k + ell, n) + 1)
    for combo in itertools.combinations(window, b):
        if all(v[t - 1] <= i for i, t in enumerate(combo, start=1)):
            return True
    return False


# ---------------------------------------------------------------------------
# graph oracles
# ---------------------------------------------------------------------------


def _components(n, edges, removed=()):
    adj = {v: [] for v in range(1, n + 1) if v not in removed}
    for u, v in edges:
        if u not in removed and v not in removed:
            adj[u].append(v)
            adj[v].append(u)
    seen = set()
    comps = []
    for s in adj:
        if s in seen:
            continue
        stack, comp = [s], set()
        seen.add(s)
        while stack:
            x = stack.pop()
            comp.add(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append(comp)
    return comps


def brute_articulation(n, edges):
    """A vertex is an articulation point iff removing it increases the
    component count among the remaining vertices."""
    base = len(_components(n, edges))
    out = set()
    for v in range(1, n + 1):
        if n > 1 and len(_components(n, edges, removed={v})) > base:
            out.add(v)
    return out


def brute_distance_matrix(n, edges):
    from collections import deque

    adj = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = {}
    for s in range(1, n + 1):
        d = {s: 0}
        dq = deque([s])
        while dq:
            x = dq.popleft()
            for y in adj[x]:
                if y not in d:
                    d[y] = d[x] + 1
                    dq.append(y)
        dist[s] = d
    return dist


# ---------------------------------------------------------------------------
# width oracles
# ---------------------------------------------------------------------------


def reference_treewidth(n, edges):
    """Elimination-order subset DP, n <= 14.

    f(S) = best achievable width having eliminated exactly the vertices of S,
    where eliminating v costs the number of vertices reachable from v through
    S (v's neighbors in the partially eliminated graph).
    """
    adj = [0] * n
    for u, v in edges:
        adj[u - 1] |= 1 << (v - 1)
        adj[v - 1] |= 1 << (u - 1)

    def cost(eliminated, v):
        seen = adj[v]
        frontier = seen & eliminated
        while frontier:
            grow = 0
            while frontier:
                low = frontier & -frontier
                frontier ^= low
                grow |= adj[low.bit_length() - 1]
            new = grow & ~seen
            seen |= grow
            frontier = new & eliminated
        return bin(seen & ~eliminated & ~(1 << v)).count("1")

    full = (1 << n) - 1
    f = [0] * (1 << n)
    for s in range(1, 1 << n):
        best = n
        t = s
        while t:
            low = t & -t
            t ^= low
            v = low.bit_length() - 1
            best = min(best, max(f[s ^ low], cost(s ^ low, v)))
        f[s] = best
    return f[full]


def brute_treewidth_orders(n, edges):
    """Try every elimination order outright; n <= 7."""
    adj0 = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj0[u].add(v)
        adj0[v].add(u)
    best = n
    for order in itertools.permutations(range(1, n + 1)):
        adj = {v: set(nb) for v, nb in adj0.items()}
        width = 0
        for v in order:
            nb = adj.pop(v)
            width = max(width, len(nb))
            for a in nb:
                adj[a].discard(v)
                adj[a] |= nb - {a}
        best = min(best, width)
        if best == 0:
            break
    return best


def brute_cutwidth(n, edges):
    """Minimum over all orderings of the maximum cut; n <= 7."""
    best = None
    for order in itertools.permutations(range(1, n + 1)):
        pos = {v: i for i, v in enumerate(order)}
        worst = 0
        for cut in range(n - 1):
            worst = max(
                worst,
                sum(1 for u, v in edges if (pos[u] <= cut) != (pos[v] <= cut)),
            )
        if best is None or worst < best:
            best = worst
    return best


def brute_vertex_iso(n, edges):
    from fractions import Fraction

    adj = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    best = None
    verts = list(range(1, n + 1))
    for r in range(1, n // 2 + 1):
        for sub in itertools.combinations(verts, r):
            s = set(sub)
            boundary = set().union(*(adj[v] for v in s)) - s
            ratio = Fraction(len(boundary), len(s))
            if best is None or ratio < best:
                best = ratio
    return best
