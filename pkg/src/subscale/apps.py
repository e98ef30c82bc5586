"""Per-subgraph programs: clustering coefficient, triangles, weak ties, motifs, PPR, components."""

from __future__ import annotations

import random
import zlib
from collections import Counter


def _neighbor_sets(view, nbrs):
    nset = set(nbrs)
    return {u: nset.intersection(view.neighbors(u)) for u in nbrs}


def triangle_count(view) -> int:
    """Triangles through the query vertex inside its subgraph."""
    qv = view.query_vertex
    nbrs = view.neighbors(qv)
    links = _neighbor_sets(view, nbrs)
    return sum(len(s) for s in links.values()) // 2


def lcc(view) -> float:
    """Local clustering coefficient of the query vertex.

    For directed graphs neighbors are taken in both directions and every
    directed edge between two of them counts, out of ``d * (d - 1)``.
    """
    qv = view.query_vertex
    nbrs = view.neighbors(qv)
    d = len(nbrs)
    if d < 2:
        return 0.0
    if view.directed:
        nset = set(nbrs)
        links = sum(1 for u in nbrs for w in view.out_neighbors(u) if w in nset)
        return links / (d * (d - 1))
    return 2 * triangle_count(view) / (d * (d - 1))


def weak_ties(view) -> int:
    """Pairs of the query vertex's neighbors that are not linked to each other."""
    d = len(view.neighbors(view.query_vertex))
    return d * (d - 1) // 2 - triangle_count(view)


def _is_ffl(has, a, b, c) -> bool:
    # x->y, y->z, x->z for some labelling of the triple
    for x, y, z in ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)):
        if has(x, y) and has(y, z) and has(x, z):
            return True
    return False


def motif_ffl(view) -> int:
    """Vertex triples containing the query vertex that form a feed-forward loop."""
    if not view.directed:
        raise ValueError("feed-forward loops need a directed graph")
    qv = view.query_vertex
    nbrs = view.neighbors(qv)
    out = {u: set(view.out_neighbors(u)) for u in [qv, *nbrs]}

    def has(x, y):
        return y in out[x]

    count = 0
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1:]:
            if _is_ffl(has, qv, a, b):
                count += 1
    return count


def ppr_monte_carlo(view, steps=100_000, restart_prob=0.15, seed=0, walks=None) -> dict:
    """Personalized PageRank of the query vertex from restarting random walks.

    Each walk starts at the query vertex; at every step the current vertex is
    counted, then the walk ends with probability ``restart_prob`` or moves to
    a uniform out-neighbor (a dead end also ends it). Walks run back to back
    until ``steps`` vertices have been counted, or exactly ``walks`` walks
    when that is given. Visit frequencies are returned.
    """
    if not 0 < restart_prob < 1:
        raise ValueError("restart_prob must lie in (0, 1)")
    qv = view.query_vertex
    salt = qv if isinstance(qv, int) else zlib.crc32(str(qv).encode())
    rng = random.Random(seed * 1_000_003 + salt)
    nxt = view.out_neighbors if view.directed else view.neighbors
    cache = {}
    visits = Counter()
    rand = rng.random
    total = 0
    done = 0
    cur = qv
    while (total < steps) if walks is None else (done < walks):
        visits[cur] += 1
        total += 1
        if rand() < restart_prob:
            cur = qv
            done += 1
            continue
        nb = cache.get(cur)
        if nb is None:
            nb = cache[cur] = nxt(cur)
        if nb:
            cur = nb[int(rand() * len(nb))]
        else:
            cur = qv
            done += 1
    return {v: c / total for v, c in sorted(visits.items())}


def make_ppr(steps=100_000, restart_prob=0.15, seed=0, walks=None):
    def program(view):
        return ppr_monte_carlo(view, steps, restart_prob, seed, walks)

    program.__name__ = "ppr"
    return program


def top_k_links(view_neighbors, scores, qv, k=10) -> list:
    """Best-scoring vertices not already linked to ``qv``: (vertex, score), highest first."""
    skip = set(view_neighbors) | {qv}
    cands = [(v, s) for v, s in scores.items() if v not in skip]
    cands.sort(key=lambda t: (-t[1], t[0]))
    return cands[:k]


def link_prediction(view, k=10, steps=100_000, restart_prob=0.15, seed=0, walks=None) -> list:
    scores = ppr_monte_carlo(view, steps, restart_prob, seed, walks)
    return top_k_links(view.neighbors(view.query_vertex), scores, view.query_vertex, k)


class ConnectedComponents:
    """Label propagation: every vertex starts as its own label and takes the minimum in its subgraph."""

    name = "cc"

    def initial(self, v):
        return v

    def step(self, view):
        return min(view.state(v) for v in view.vertices())


APPS = {
    "lcc": lcc,
    "triangles": triangle_count,
    "weak-ties": weak_ties,
    "ffl": motif_ffl,
}
