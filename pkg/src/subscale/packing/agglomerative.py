"""Bottom-up clustering of shingle-adjacent subgraphs with a sampled merge threshold."""

from __future__ import annotations

import math
import random

from .model import Cluster, PackingConfig, greedy_bins, solution_from_bins
from .shingles import HashFamily


def weighted_jaccard_distance(a: Cluster, b: Cluster) -> float:
    shared = a.weights.keys() & b.weights.keys()
    inter = sum(a.weights[v] for v in shared)
    union = a.size + b.size - inter
    return 1.0 - inter / union if union else 0.0


def _fits(a: Cluster, b: Cluster, cfg: PackingConfig) -> bool:
    if len(a.subgraphs) + len(b.subgraphs) > cfg.max_subgraphs:
        return False
    if a.size + b.size <= cfg.bin_capacity:
        return True
    return a.union_size(b.weights) <= cfg.bin_capacity


def _merge(a: Cluster, b: Cluster) -> Cluster:
    weights = dict(a.weights)
    weights.update(b.weights)
    sig = tuple(map(min, a.signature, b.signature))  # min-hash of a union
    return Cluster(weights, a.subgraphs + b.subgraphs, sig)


def _percentile(values, q) -> float:
    values = sorted(values)
    pos = (len(values) - 1) * q
    lo = math.floor(pos)
    hi = min(lo + 1, len(values) - 1)
    return values[lo] + (values[hi] - values[lo]) * (pos - lo)


def agglomerate(clusters, cfg: PackingConfig, rng=None, sample_fraction=0.01, min_samples=24):
    """Merge clusters until no pair within reach fits; returns the final clusters, shingle-sorted.

    Each round samples pairs at most ``window`` apart in shingle order and sets
    the threshold to the 10th percentile of their distances. The window grows
    by half when most sampled pairs cannot fit, or when a round merges nothing.
    """
    rng = rng or random.Random(cfg.seed)
    cl = sorted(clusters, key=lambda c: c.signature)
    window = max(1, cfg.merge_window)
    forced = False
    while len(cl) > 1:
        n = len(cl)
        window = min(window, n - 1)
        if forced:
            tau = 1.0
        else:
            reach = sum(min(window, n - 1 - i) for i in range(n))
            m = min(reach, max(min_samples, math.ceil(sample_fraction * reach)))
            dists = []
            excluded = 0
            for _ in range(m):
                i = rng.randrange(n - 1)
                j = min(n - 1, i + rng.randint(1, window))
                if _fits(cl[i], cl[j], cfg):
                    dists.append(weighted_jaccard_distance(cl[i], cl[j]))
                else:
                    excluded += 1
            if excluded * 2 > m and window < n - 1:
                window = math.ceil(window * 1.5)
                continue
            tau = _percentile(dists, 0.10) if dists else 1.0

        merged_any = False
        taken = [False] * n
        out = []
        for i in range(n):
            if taken[i]:
                continue
            a = cl[i]
            for j in range(i + 1, min(n, i + window + 1)):
                if taken[j]:
                    continue
                b = cl[j]
                if weighted_jaccard_distance(a, b) <= tau and _fits(a, b, cfg):
                    a = _merge(a, b)
                    taken[j] = True
                    merged_any = True
                    break
            out.append(a)
        cl = sorted(out, key=lambda c: c.signature)
        if merged_any:
            forced = False
        elif window < len(cl) - 1:
            window = math.ceil(window * 1.5)
        elif not forced:
            forced = True
        else:
            break
    return cl


def pack_agglomerative(subgraphs, cfg: PackingConfig, graph=None):
    family = HashFamily(cfg.shingles, cfg.seed)
    clusters = [Cluster(sg.weights, [i], family.signature(sg.members)) for i, sg in enumerate(subgraphs)]
    final = agglomerate(clusters, cfg)
    return solution_from_bins(subgraphs, greedy_bins(final, cfg), cfg, "agglomerative")
