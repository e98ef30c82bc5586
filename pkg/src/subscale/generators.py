"""Seeded synthetic graph generators used by tests, benches and the CLI."""

from __future__ import annotations

import math
import random

from .graph import PropertyGraph, from_edges


def barabasi_albert_edges(n, m, seed=0):
    """Preferential attachment edge list on vertices 0..n-1 (m*(n-m) edges)."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = random.Random(seed)
    edges = []
    repeated = []
    targets = list(range(m))
    for v in range(m, n):
        for t in targets:
            edges.append((v, t))
        repeated.extend(targets)
        repeated.extend([v] * m)
        chosen = set()
        while len(chosen) < m:
            chosen.add(rng.choice(repeated))
        targets = sorted(chosen)
    return edges


def holme_kim_edges(n, m, p_triangle, seed=0):
    """Power-law graph with tunable clustering (triad formation step)."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = random.Random(seed)
    adj = {v: set() for v in range(n)}
    edges = []
    repeated = []

    def link(a, b):
        adj[a].add(b)
        adj[b].add(a)
        edges.append((a, b))
        repeated.extend((a, b))

    for v in range(1, m + 1):
        link(v, 0)
    for v in range(m + 1, n):
        target = rng.choice(repeated)
        link(v, target)
        added = 1
        while added < m:
            cands = [w for w in adj[target] if w != v and w not in adj[v]]
            if cands and rng.random() < p_triangle:
                w = rng.choice(sorted(cands))
            else:
                w = rng.choice(repeated)
                if w == v or w in adj[v]:
                    continue
                target = w
            link(v, w)
            added += 1
    return edges


def erdos_renyi_edges(n, p, seed=0, directed=False):
    """G(n, p) by geometric skipping; linear in the number of edges."""
    rng = random.Random(seed)
    edges = []
    if p <= 0 or n < 2:
        return edges
    if p >= 1:
        if directed:
            return [(u, v) for u in range(n) for v in range(n) if u != v]
        return [(u, v) for u in range(n) for v in range(u + 1, n)]
    lp = math.log(1.0 - p)
    total = n * (n - 1) if directed else n * (n - 1) // 2
    idx = -1
    while True:
        idx += 1 + int(math.log(1.0 - rng.random()) / lp)
        if idx >= total:
            break
        if directed:
            u, r = divmod(idx, n - 1)
            v = r if r < u else r + 1
        else:
            # row u holds pairs (u, u+1..n-1)
            u = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * idx)) // 2)
            while u * (2 * n - u - 1) // 2 > idx:
                u -= 1
            while (u + 1) * (2 * n - u - 2) // 2 <= idx:
                u += 1
            v = idx - u * (2 * n - u - 1) // 2 + u + 1
        edges.append((u, v))
    return edges


def random_dag_edges(n, p, seed=0):
    """Edges u->v with u < v, each present with probability p."""
    rng = random.Random(seed)
    return [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]


def relabel(edges, n, seed):
    """Apply a seeded random permutation to vertex ids 0..n-1."""
    perm = list(range(n))
    random.Random(seed).shuffle(perm)
    return [(perm[u], perm[v]) + tuple(rest) for u, v, *rest in edges], perm


def barabasi_albert(n, m, seed=0, shuffle_ids=True) -> PropertyGraph:
    edges = barabasi_albert_edges(n, m, seed)
    if shuffle_ids:
        edges, _ = relabel(edges, n, seed + 7919)
    return from_edges(edges, vertices=range(n))


def holme_kim(n, m, p_triangle, seed=0, shuffle_ids=True) -> PropertyGraph:
    edges = holme_kim_edges(n, m, p_triangle, seed)
    if shuffle_ids:
        edges, _ = relabel(edges, n, seed + 7919)
    return from_edges(edges, vertices=range(n))


def erdos_renyi(n, p, seed=0, directed=False) -> PropertyGraph:
    return from_edges(erdos_renyi_edges(n, p, seed, directed), directed=directed, vertices=range(n))


def path_graph(n, start=1) -> PropertyGraph:
    return from_edges([(v, v + 1) for v in range(start, start + n - 1)], vertices=range(start, start + n))


def star_graph(leaves, center=0) -> PropertyGraph:
    return from_edges([(center, center + i) for i in range(1, leaves + 1)], vertices=[center])


def complete_graph(n, start=0) -> PropertyGraph:
    vs = range(start, start + n)
    return from_edges([(u, v) for u in vs for v in vs if u < v], vertices=vs)


def with_random_attrs(graph: PropertyGraph, seed=0, **specs) -> PropertyGraph:
    """Copy of ``graph`` with vertex attributes drawn per ``name=(choices)`` or ``name=callable(rng)``."""
    rng = random.Random(seed)
    attrs = {}
    for v in graph.vertices():
        rec = dict(graph.vertex_attrs(v))
        for name, spec in specs.items():
            rec[name] = spec(rng) if callable(spec) else rng.choice(spec)
        attrs[v] = rec
    edges = [(u, v, dict(r)) for u, v, r in graph.edges()]
    return from_edges(edges, directed=graph.directed, vertices=graph.vertices(), vertex_attrs=attrs)


def with_random_edge_weights(graph: PropertyGraph, lo=1, hi=10, seed=0) -> PropertyGraph:
    rng = random.Random(seed)
    edges = [(u, v, {**r, "weight": rng.randint(lo, hi)}) for u, v, r in graph.edges()]
    attrs = {v: graph.vertex_attrs(v) for v in graph.vertices()}
    return from_edges(edges, directed=graph.directed, vertices=graph.vertices(), vertex_attrs=attrs)
