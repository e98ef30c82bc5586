"""Partition the candidate vertices, grow partitions to cover whole subgraphs, then pack."""

from __future__ import annotations

import math
from collections import deque

from ..errors import CapacityError
from .model import Cluster, PackingConfig, greedy_bins, solution_from_bins
from .shingles import HashFamily


def region_grow(adjacency, k) -> list:
    """Split the vertices of ``adjacency`` into about ``k`` connected-ish regions.

    Seeds are spread along a BFS order of the graph; regions then grow one
    vertex at a time, round robin, each capped at ``ceil(n/k)``. Vertices no
    region can reach are handed to the emptiest region.
    """
    vertices = sorted(adjacency)
    n = len(vertices)
    if n == 0:
        return []
    k = max(1, min(k, n))
    cap = math.ceil(n / k)

    order = []
    seen = set()
    for s in vertices:
        if s in seen:
            continue
        seen.add(s)
        q = deque([s])
        while q:
            u = q.popleft()
            order.append(u)
            for w in adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)

    seeds = [order[(i * n) // k] for i in range(k)]
    owner = {}
    regions = []
    frontiers = []
    for i, s in enumerate(seeds):
        owner[s] = i
        regions.append([s])
        frontiers.append(deque(adjacency[s]))
    active = True
    while active:
        active = False
        for i in range(k):
            if len(regions[i]) >= cap:
                continue
            fr = frontiers[i]
            while fr and fr[0] in owner:
                fr.popleft()
            if not fr:
                continue
            u = fr.popleft()
            owner[u] = i
            regions[i].append(u)
            fr.extend(w for w in adjacency[u] if w not in owner)
            active = True
    for u in order:
        if u not in owner:
            i = min(range(k), key=lambda j: (len(regions[j]), j))
            owner[u] = i
            regions[i].append(u)
    return [r for r in regions if r]


def pack_partition_grow(subgraphs, cfg: PackingConfig, graph=None):
    """Overpartition, grow each partition by its query vertices' subgraphs, shingle-sort, pack.

    A grown partition over capacity (or over MAX subgraphs) is split in half
    and retried. Partitions holding no query vertex are dropped.
    """
    weights = {}
    for sg in subgraphs:
        weights.update(sg.weights)
    candidates = set(weights)
    adjacency = {}
    for v in candidates:
        if graph is not None and v in graph:
            adjacency[v] = [w for w in graph.neighbors(v) if w in candidates]
        else:
            adjacency[v] = []
    by_qv = {}
    for i, sg in enumerate(subgraphs):
        by_qv.setdefault(sg.query_vertex, []).append(i)

    total = sum(sg.size for sg in subgraphs)
    k = cfg.overpartition or max(1, 2 * math.ceil(total / cfg.bin_capacity))
    pending = deque(region_grow(adjacency, k))
    clusters = []
    while pending:
        part = pending.popleft()
        idx = sorted(i for v in part for i in by_qv.get(v, ()))
        if not idx:
            continue
        grown = {v: weights[v] for v in part}
        for i in idx:
            grown.update(subgraphs[i].weights)
        if sum(grown.values()) <= cfg.bin_capacity and len(idx) <= cfg.max_subgraphs:
            clusters.append(Cluster(grown, idx))
            continue
        if len(part) == 1:
            if len(idx) == 1:
                raise CapacityError(f"subgraph of {part[0]} exceeds bin capacity")
            # several subgraphs share this query vertex: fall back to one item each
            clusters.extend(Cluster(subgraphs[i].weights, [i]) for i in idx)
            continue
        half = len(part) // 2
        pending.appendleft(part[half:])
        pending.appendleft(part[:half])

    family = HashFamily(cfg.shingles, cfg.seed)
    for c in clusters:
        c.signature = family.signature(c.weights.keys())
    clusters.sort(key=lambda c: c.signature)
    return solution_from_bins(subgraphs, greedy_bins(clusters, cfg), cfg, "partition-grow")
