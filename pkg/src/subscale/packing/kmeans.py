"""Capacity-constrained K-means over vertex sets with multiset centroids."""

from __future__ import annotations

import math
import random
from collections import Counter

from .model import Cluster, PackingConfig, greedy_bins, solution_from_bins


class _Centroids:
    """K multisets of vertices with an inverted index vertex -> centroid multiplicities."""

    def __init__(self, k, weights):
        self.weights = weights
        self.counts = [Counter() for _ in range(k)]
        self.sizes = [0] * k
        self.members = [set() for _ in range(k)]
        self.where = {}

    def add(self, c, sg, i):
        cnt = self.counts[c]
        for v in sg.members:
            if cnt[v] == 0:
                self.sizes[c] += self.weights[v]
            cnt[v] += 1
            self.where.setdefault(v, Counter())[c] += 1
        self.members[c].add(i)

    def remove(self, c, sg, i):
        cnt = self.counts[c]
        for v in sg.members:
            cnt[v] -= 1
            if cnt[v] == 0:
                del cnt[v]
                self.sizes[c] -= self.weights[v]
            w = self.where[v]
            w[c] -= 1
            if w[c] == 0:
                del w[c]
        self.members[c].discard(i)

    def overlaps(self, sg) -> Counter:
        """Weighted intersection of ``sg`` with every centroid it touches."""
        score = Counter()
        for v in sg.members:
            w = self.weights[v]
            for c in self.where.get(v, ()):
                score[c] += w
        return score

    def release(self, c, sg) -> int:
        """How much centroid ``c`` would shrink if ``sg`` left it."""
        cnt = self.counts[c]
        return sum(self.weights[v] for v in sg.members if cnt[v] == 1)


def centroid_distance(centroid_weights, sg, bin_capacity) -> float:
    """Weighted overlap of ``sg`` with a centroid, or -inf when their union exceeds the capacity."""
    overlap = sum(w for v, w in sg.weights.items() if v in centroid_weights)
    if sum(centroid_weights.values()) + sg.size - overlap > bin_capacity:
        return -math.inf
    return overlap


def _cluster_round(subgraphs, weights, k, cfg: PackingConfig, rng):
    q = len(subgraphs)
    cap = cfg.bin_capacity
    limit = cfg.max_subgraphs
    cents = _Centroids(k, weights)
    seeds = sorted(rng.sample(range(q), k))
    where = [-1] * q
    for c, i in enumerate(seeds):
        cents.add(c, subgraphs[i], i)
        where[i] = c

    def feasible(c, sg, overlap):
        return (len(cents.members[c]) < limit
                and cents.sizes[c] + sg.size - overlap <= cap)

    # initial assignment by largest weighted intersection
    for i, sg in enumerate(subgraphs):
        if where[i] >= 0:
            continue
        score = cents.overlaps(sg)
        best = None
        for c, ov in sorted(score.items(), key=lambda t: (-t[1], t[0])):
            if feasible(c, sg, ov):
                best = c
                break
        if best is None:
            for c in range(k):
                if c not in score and feasible(c, sg, 0):
                    best = c
                    break
        if best is not None:
            cents.add(best, sg, i)
            where[i] = best

    # move subgraphs while the summed centroid size drops
    for _ in range(cfg.kmeans_max_iter):
        moved = 0
        for i, sg in enumerate(subgraphs):
            cur = where[i]
            if cur < 0 or len(cents.members[cur]) == 1:
                continue  # centroids never empty out
            score = cents.overlaps(sg)
            freed = cents.release(cur, sg)
            best, best_gain = None, 0
            for c, ov in sorted(score.items()):
                if c == cur or not feasible(c, sg, ov):
                    continue
                gain = freed - (sg.size - ov)
                if gain > best_gain:
                    best, best_gain = c, gain
            if best is not None:
                cents.remove(cur, sg, i)
                cents.add(best, sg, i)
                where[i] = best
                moved += 1
        if not moved:
            break

    unassigned = [i for i in range(q) if where[i] < 0]
    return cents, seeds, unassigned


def pack_kmeans(subgraphs, cfg: PackingConfig, graph=None):
    """Cluster subgraphs into K capacity-respecting centroids, then first-fit the centroids.

    K starts at ``ceil(1.2 * sum(sizes) / BC)`` unless given; when some
    subgraph fits no centroid, K grows by the number left out and the
    clustering restarts.
    """
    q = len(subgraphs)
    if q == 0:
        return solution_from_bins(subgraphs, [], cfg, "kmeans")
    weights = {}
    for sg in subgraphs:
        weights.update(sg.weights)
    k = cfg.kmeans_k or math.ceil(1.2 * sum(sg.size for sg in subgraphs) / cfg.bin_capacity)
    k = max(1, min(k, q))
    rng = random.Random(cfg.seed)
    while True:
        cents, seeds, unassigned = _cluster_round(subgraphs, weights, k, cfg, rng)
        if not unassigned:
            break
        k = min(q, k + len(unassigned))
    clusters = []
    for c in range(k):
        if not cents.members[c]:
            continue
        w = {v: weights[v] for v in cents.counts[c]}
        clusters.append(Cluster(w, sorted(cents.members[c])))
    return solution_from_bins(subgraphs, greedy_bins(clusters, cfg), cfg, "kmeans")
