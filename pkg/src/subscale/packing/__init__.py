"""Overlap-aware bin packing of subgraphs into capacity-bounded bins."""

from __future__ import annotations

from .model import (
    HEURISTICS,
    Bin,
    Cluster,
    PackingConfig,
    PackingSolution,
    assign_ownership,
    greedy_bins,
    greedy_pack,
    solution_from_bins,
    union_size,
)
from .shingles import HashFamily, compute_shingles, order_ffd, order_firstfit, order_shingle


def _ordered(order_fn):
    def run(subgraphs, cfg, graph=None):
        idx = order_fn(subgraphs, cfg)
        items = [Cluster.of(subgraphs[i], i) for i in idx]
        return solution_from_bins(subgraphs, greedy_bins(items, cfg), cfg, cfg.heuristic)

    return run


def _dispatch():
    from .agglomerative import pack_agglomerative
    from .exact import pack_exact
    from .kmeans import pack_kmeans
    from .partition_grow import pack_partition_grow

    return {
        "firstfit": _ordered(lambda s, c: order_firstfit(s)),
        "ffd": _ordered(lambda s, c: order_ffd(s)),
        "shingle": _ordered(lambda s, c: order_shingle(s, HashFamily(c.shingles, c.seed))),
        "partition-grow": pack_partition_grow,
        "agglomerative": pack_agglomerative,
        "kmeans": pack_kmeans,
        "exact": pack_exact,
    }


def pack(subgraphs, cfg: PackingConfig, graph=None) -> PackingSolution:
    """Pack ``subgraphs`` with ``cfg.heuristic``; ``graph`` is needed only by partition-grow."""
    return _dispatch()[cfg.heuristic](list(subgraphs), cfg, graph)


__all__ = [
    "HEURISTICS", "Bin", "Cluster", "HashFamily", "PackingConfig", "PackingSolution",
    "assign_ownership", "compute_shingles", "greedy_bins", "greedy_pack", "order_ffd",
    "order_firstfit", "order_shingle", "pack", "solution_from_bins", "union_size",
]
