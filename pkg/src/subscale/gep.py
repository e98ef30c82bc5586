"""Three-stage map/shuffle/reduce pipeline: extract 1- or 2-hop subgraphs, then pack per shard.

Stage 1 maps every vertex passing the vertex filter to its own adjacency
record plus one record per filtered neighbor. Reducers assemble the 1-hop
members of each query vertex, the ids two hops out, and push their own weight
to every vertex exactly two hops away. Stage 2 joins those weights onto the
query vertices' partial subgraphs (keys with weights only are discarded) and
keys each finished subgraph by its min-hash signature. Stage 3 routes by the
first shingle, shingle-packs each shard independently, and finally merges
under-filled bins across shards.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import CapacityError, UnsupportedRadiusError
from .extraction import ExtractionQuery, Extractor, SubgraphOfInterest, apply_sampling
from .graph import DEFAULT_WEIGHTS, PropertyGraph, WeightModel
from .packing import Bin, Cluster, HashFamily, PackingConfig, greedy_bins, solution_from_bins

log = logging.getLogger(__name__)


@dataclass
class GepResult:
    subgraphs: list
    solution: object
    stats: dict = field(default_factory=dict)


def _shuffle(records, shards):
    """Group (key, value) records by key, split into ``shards`` reducer partitions."""
    parts = [dict() for _ in range(shards)]
    for key, value in records:
        parts[hash(key) % shards].setdefault(key, []).append(value)
    return parts


def _run_reducers(parts, reducer, pool):
    outs = list(pool.map(lambda part: [r for key in sorted(part) for r in reducer(key, part[key])], parts))
    return [r for out in outs for r in out]


def merge_underutilized(bins, cfg: PackingConfig, threshold=0.5) -> list:
    """Fold bins filled below ``threshold * BC`` into other bins while capacity and MAX allow.

    Bins are visited least-full first; each is merged into the first other bin,
    again least-full first, whose union still fits.
    """
    bins = list(bins)
    limit = threshold * cfg.bin_capacity
    changed = True
    while changed:
        changed = False
        for a in sorted(bins, key=lambda b: (b.used, b.id)):
            if a.used >= limit:
                break
            for b in sorted(bins, key=lambda b: (b.used, b.id)):
                if b is a or len(a.subgraphs) + len(b.subgraphs) > cfg.max_subgraphs:
                    continue
                if b.union_size(a.resident, a.used) <= cfg.bin_capacity:
                    keep, drop = (a, b) if a.id < b.id else (b, a)
                    keep.absorb(drop)
                    bins.remove(drop)
                    changed = True
                    break
            if changed:
                break
    bins.sort(key=lambda b: b.id)
    for i, b in enumerate(bins):
        b.id = i
    return bins


def gep(graph: PropertyGraph, query: ExtractionQuery, cfg: PackingConfig, shards=4,
        workers=None, weight_model: WeightModel = DEFAULT_WEIGHTS, merge_threshold=0.5) -> GepResult:
    if query.k > 2:
        raise UnsupportedRadiusError(f"the staged pipeline supports k <= 2, got k={query.k}")
    if shards < 1:
        raise ValueError("need at least one shard")
    ex = Extractor(graph, query, weight_model)
    k = query.k
    pqv = query.pqv
    is_qv = {}

    def qv(v):
        r = is_qv.get(v)
        if r is None:
            r = is_qv[v] = pqv(graph.vertex_attrs(v))
        return r

    stats = {"shards": shards}
    timings = {}
    with ThreadPoolExecutor(workers or shards) as pool:
        # stage 1
        t0 = time.perf_counter()
        records = []
        for u in graph.vertices():
            passes = ex.passes_vertex(u)
            if not passes and not (query.exempt_query_vertex and qv(u)):
                continue
            nbrs = ex.filtered_neighbors(u) if k > 0 else []
            wu = ex.weight(u)
            records.append((u, ("self", wu, nbrs)))
            if passes:
                for w in nbrs:
                    records.append((w, ("nbr", u, wu, nbrs)))
            elif k > 0:
                # an exempt query vertex is invisible to its neighbors, so its
                # mapper looks them (and, for k=2, their neighbors) up itself
                ring = set()
                for w in nbrs:
                    wn = ex.filtered_neighbors(w)
                    records.append((u, ("nbr", w, ex.weight(w), wn)))
                    ring.update(wn)
                if k == 2:
                    for x in sorted(ring.difference(nbrs, (u,))):
                        records.append((u, ("w2", x, ex.weight(x))))
        stats["stage1_records"] = len(records)

        def reduce1(v, values):
            own = next((x for x in values if x[0] == "self"), None)
            if own is None:
                return []
            _, wv, nbrs = own
            out = []
            one_hop = {v: wv}
            two_hop = set()
            for rec in values:
                if rec[0] == "nbr":
                    _, u, wu, unbrs = rec
                    if k >= 1:
                        one_hop[u] = wu
                    two_hop.update(unbrs)
                elif rec[0] == "w2":
                    out.append((v, rec))  # looked up by an exempt query vertex's own mapper
            two_hop.difference_update(one_hop)
            if k < 2:
                two_hop = set()
            if qv(v):
                out.append((v, ("partial", one_hop)))
            if ex.passes_vertex(v):
                for x in sorted(two_hop):
                    out.append((x, ("w2", v, wv)))
            return out

        stage2_in = _run_reducers(_shuffle(records, shards), reduce1, pool)
        stats["stage2_records"] = len(stage2_in)
        timings["stage1"] = time.perf_counter() - t0

        # stage 2
        t0 = time.perf_counter()
        family = HashFamily(cfg.shingles, cfg.seed)

        def reduce2(v, values):
            partial = next((x for x in values if x[0] == "partial"), None)
            if partial is None:
                return []  # weight-only key
            members = dict(partial[1])
            for rec in values:
                if rec[0] == "w2":
                    members[rec[1]] = rec[2]
            sg = SubgraphOfInterest(v, members)
            sg = apply_sampling(sg, graph, query, cfg.bin_capacity)
            if sg.size > cfg.bin_capacity:
                raise CapacityError(
                    f"subgraph of {v} has size {sg.size} > bin capacity {cfg.bin_capacity}; "
                    "configure a sampling policy"
                )
            return [(family.signature(sg.members), sg)]

        keyed = _run_reducers(_shuffle(stage2_in, shards), reduce2, pool)
        timings["stage2"] = time.perf_counter() - t0

        # stage 3
        t0 = time.perf_counter()
        keyed.sort(key=lambda t: t[1].query_vertex)
        subgraphs = [sg for _, sg in keyed]
        index = {sg.query_vertex: i for i, sg in enumerate(subgraphs)}
        routed = [[] for _ in range(shards)]
        for sig, sg in keyed:
            routed[sig[0] % shards].append((sig, sg))

        def pack_shard(items):
            items = sorted(items, key=lambda t: t[0])
            clusters = [Cluster(sg.weights, [index[sg.query_vertex]]) for _, sg in items]
            return greedy_bins(clusters, cfg)

        shard_bins = list(pool.map(pack_shard, routed))
    stats["bins_per_shard"] = [len(b) for b in shard_bins]
    bins = []
    for part in shard_bins:
        for b in part:
            b.id = len(bins)
            bins.append(b)
    stats["bins_before_merge"] = len(bins)
    bins = merge_underutilized(bins, cfg, merge_threshold)
    for b in bins:
        b.subgraphs.sort()
    timings["stage3"] = time.perf_counter() - t0
    stats["timings"] = timings
    solution = solution_from_bins(subgraphs, bins, cfg, "gep")
    log.info("gep: %d subgraphs into %d bins over %d shards", len(subgraphs), len(bins), shards)
    return GepResult(subgraphs, solution, stats)
