"""Exact minimum-bin packing by branch and bound, for small instances."""

from __future__ import annotations

import math

from ..errors import InstanceTooLargeError
from .model import Bin, PackingConfig, solution_from_bins


def lower_bound(subgraphs, cfg: PackingConfig) -> int:
    weights = {}
    for sg in subgraphs:
        weights.update(sg.weights)
    by_weight = math.ceil(sum(weights.values()) / cfg.bin_capacity)
    by_count = math.ceil(len(subgraphs) / cfg.max_subgraphs)
    return max(by_weight, by_count, 1 if subgraphs else 0)


def pack_exact(subgraphs, cfg: PackingConfig, graph=None, incumbent=None):
    """Provably minimal bin count.

    Items go largest first; each is tried in every open bin and then in one
    new bin (bins are interchangeable, so opening more than one is redundant).
    The incumbent from the greedy heuristics seeds the upper bound.
    """
    q = len(subgraphs)
    if q > cfg.exact_limit:
        raise InstanceTooLargeError(
            f"exact packing handles at most {cfg.exact_limit} subgraphs, got {q}; use a heuristic"
        )
    if q == 0:
        return solution_from_bins(subgraphs, [], cfg, "exact")
    if incumbent is None:
        from . import pack

        incumbent = min(
            (pack(subgraphs, cfg.replace(heuristic=h)) for h in ("ffd", "shingle", "firstfit")),
            key=lambda s: s.num_bins,
        )
    best = [b.subgraphs[:] for b in incumbent.bins]
    lb = lower_bound(subgraphs, cfg)
    if len(best) <= lb:
        return _build(subgraphs, best, cfg)

    order = sorted(range(q), key=lambda i: (-subgraphs[i].size, i))
    cap = cfg.bin_capacity
    limit = cfg.max_subgraphs
    residents = []  # per open bin: vertex -> weight
    used = []
    members = []

    def place(pos):
        nonlocal best
        if len(residents) >= len(best):
            return False
        if pos == q:
            best = [m[:] for m in members]
            return len(best) <= lb
        i = order[pos]
        sg = subgraphs[i]
        for b in range(len(residents)):
            if len(members[b]) >= limit:
                continue
            res = residents[b]
            new = [v for v in sg.members if v not in res]
            extra = sum(sg.weights[v] for v in new)
            if used[b] + extra > cap:
                continue
            for v in new:
                res[v] = sg.weights[v]
            used[b] += extra
            members[b].append(i)
            if place(pos + 1):
                return True
            members[b].pop()
            used[b] -= extra
            for v in new:
                del res[v]
        if len(residents) + 1 < len(best):
            residents.append(dict(sg.weights))
            used.append(sg.size)
            members.append([i])
            if place(pos + 1):
                return True
            residents.pop()
            used.pop()
            members.pop()
        return False

    place(0)
    return _build(subgraphs, best, cfg)


def _build(subgraphs, groups, cfg):
    bins = []
    for gid, group in enumerate(sorted(groups, key=min)):
        b = Bin(gid)
        for i in sorted(group):
            b.add(subgraphs[i].weights, [i])
        bins.append(b)
    return solution_from_bins(subgraphs, bins, cfg, "exact")
