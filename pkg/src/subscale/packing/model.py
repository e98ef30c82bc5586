"""Bins, packing solutions and the overlap-aware greedy first-fit packer."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Sequence

from ..errors import CapacityError, ConfigError, IntegrityError
from ..extraction import SubgraphOfInterest

HEURISTICS = ("firstfit", "ffd", "shingle", "partition-grow", "agglomerative", "kmeans", "exact")


@dataclass
class PackingConfig:
    bin_capacity: int
    max_subgraphs: int = 3000
    heuristic: str = "shingle"
    shingles: int = 6
    seed: int = 0
    merge_window: int = 10
    kmeans_k: int | None = None
    kmeans_max_iter: int = 10
    overpartition: int | None = None
    exact_limit: int = 12

    def __post_init__(self):
        if self.bin_capacity <= 0:
            raise ConfigError("bin capacity must be positive")
        if self.max_subgraphs < 1:
            raise ConfigError("MAX must be at least 1")
        if self.heuristic not in HEURISTICS:
            raise ConfigError(f"unknown heuristic {self.heuristic!r}; pick one of {', '.join(HEURISTICS)}")
        if self.shingles < 1:
            raise ConfigError("need at least one shingle")

    def replace(self, **changes) -> "PackingConfig":
        d = asdict(self)
        d.update(changes)
        return PackingConfig(**d)

    @classmethod
    def from_dict(cls, d) -> "PackingConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


class Cluster:
    """A packable item: a weighted vertex set standing for one or more subgraphs."""

    __slots__ = ("weights", "subgraphs", "size", "signature")

    def __init__(self, weights, subgraphs, signature=None):
        self.weights = weights
        self.subgraphs = list(subgraphs)
        self.size = sum(weights.values())
        self.signature = signature

    @classmethod
    def of(cls, sg: SubgraphOfInterest, index: int) -> "Cluster":
        return cls(sg.weights, [index])

    def union_size(self, other_weights) -> int:
        shared = self.weights.keys() & other_weights.keys()
        return self.size + sum(other_weights.values()) - sum(self.weights[v] for v in shared)


class Bin:
    __slots__ = ("id", "resident", "subgraphs", "used", "owned", "ghosts")

    def __init__(self, bin_id: int):
        self.id = bin_id
        self.resident = {}
        self.subgraphs = []
        self.used = 0
        self.owned = set()
        self.ghosts = set()

    def union_size(self, weights, total=None) -> int:
        """Exact capacity used after adding a vertex set with these weights."""
        res = self.resident
        shared = res.keys() & weights.keys()
        if total is None:
            total = sum(weights.values())
        return self.used + total - sum(res[v] for v in shared)

    def add(self, weights, subgraph_ids):
        res = self.resident
        for v, w in weights.items():
            if v not in res:
                res[v] = w
                self.used += w
        self.subgraphs.extend(subgraph_ids)

    def absorb(self, other: "Bin"):
        self.add(other.resident, other.subgraphs)

    def __repr__(self):
        return f"Bin({self.id}, used={self.used}, subgraphs={len(self.subgraphs)})"


def union_size(bin: Bin, sg) -> int:
    return bin.union_size(sg.weights)


def greedy_bins(items: Sequence[Cluster], cfg: PackingConfig, start_id=0) -> list:
    """First-fit over ``items`` in the given order, overlap counted once per bin."""
    cap = cfg.bin_capacity
    limit = cfg.max_subgraphs
    bins = []
    for item in items:
        if item.size > cap:
            raise CapacityError(
                f"item of size {item.size} exceeds bin capacity {cap}; sample the subgraph first"
            )
        if len(item.subgraphs) > limit:
            raise CapacityError(f"item holds {len(item.subgraphs)} subgraphs > MAX {limit}")
        placed = False
        for b in bins:
            if len(b.subgraphs) + len(item.subgraphs) > limit:
                continue
            if b.used + item.size <= cap or b.union_size(item.weights, item.size) <= cap:
                b.add(item.weights, item.subgraphs)
                placed = True
                break
        if not placed:
            b = Bin(start_id + len(bins))
            b.add(item.weights, item.subgraphs)
            bins.append(b)
    return bins


class PackingSolution:
    """Bins plus the subgraph-to-bin map and query-vertex ownership."""

    def __init__(self, subgraphs: Sequence[SubgraphOfInterest], bins: list, heuristic="", config=None):
        self.subgraphs = list(subgraphs)
        self.bins = bins
        self.heuristic = heuristic
        self.config = config
        self.assignment = [-1] * len(self.subgraphs)
        for b in bins:
            for i in b.subgraphs:
                if self.assignment[i] != -1:
                    raise IntegrityError(f"subgraph {i} assigned to bins {self.assignment[i]} and {b.id}")
                self.assignment[i] = b.id
        self.owner = {}

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    def bin_of(self, index: int) -> Bin:
        return self.bins[self.assignment[index]]

    def validate(self, cfg: PackingConfig | None = None):
        """Raise :class:`IntegrityError` unless every packing invariant holds."""
        cfg = cfg or self.config
        for pos, b in enumerate(self.bins):
            if b.id != pos:
                raise IntegrityError(f"bin ids not dense: position {pos} holds bin {b.id}")
            if b.used != sum(b.resident.values()):
                raise IntegrityError(f"bin {b.id} used capacity out of sync")
            if cfg is not None:
                if b.used > cfg.bin_capacity:
                    raise IntegrityError(f"bin {b.id} over capacity: {b.used} > {cfg.bin_capacity}")
                if len(b.subgraphs) > cfg.max_subgraphs:
                    raise IntegrityError(f"bin {b.id} holds {len(b.subgraphs)} > MAX subgraphs")
        for i, sg in enumerate(self.subgraphs):
            if self.assignment[i] < 0:
                raise IntegrityError(f"subgraph {i} (qv {sg.query_vertex}) unassigned")
            res = self.bins[self.assignment[i]].resident
            if not all(v in res for v in sg.members):
                raise IntegrityError(f"subgraph {i} (qv {sg.query_vertex}) not contained in its bin")
        if self.owner:
            seen = set()
            for b in self.bins:
                if b.owned & seen:
                    raise IntegrityError("a query vertex is owned by two bins")
                seen |= b.owned
            if seen != {sg.query_vertex for sg in self.subgraphs}:
                raise IntegrityError("ownership does not cover all query vertices")
        return self

    # -- serialization ---------------------------------------------------

    def vertex_map(self) -> list:
        """Rows (vertex, bin, 'owned'|'ghost') for every resident copy."""
        rows = []
        for b in self.bins:
            for v in sorted(b.resident):
                rows.append((v, b.id, "ghost" if v in b.ghosts else "owned"))
        rows.sort()
        return rows

    def write_vertex_map(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for v, b, role in self.vertex_map():
                fh.write(f"{v}\t{b}\t{role}\n")

    def to_dict(self) -> dict:
        weights = {}
        for sg in self.subgraphs:
            weights.update(sg.weights)
        return {
            "heuristic": self.heuristic,
            "config": asdict(self.config) if self.config else None,
            "bins": [
                {
                    "id": b.id,
                    "used_capacity": b.used,
                    "subgraphs": [self.subgraphs[i].key for i in b.subgraphs],
                    "owned": sorted(b.owned),
                    "ghosts": sorted(b.ghosts),
                    "resident": sorted(b.resident),
                }
                for b in self.bins
            ],
            "subgraphs": [
                {
                    "query_vertex": sg.query_vertex,
                    "label": sg.label,
                    "bin": self.assignment[i],
                    "members": sorted(sg.members),
                }
                for i, sg in enumerate(self.subgraphs)
            ],
            "weights": {str(v): w for v, w in sorted(weights.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d) -> "PackingSolution":
        weights = {int(v): w for v, w in d["weights"].items()}
        sgs = [
            SubgraphOfInterest(s["query_vertex"], {v: weights[v] for v in s["members"]}, label=s.get("label"))
            for s in d["subgraphs"]
        ]
        bins = []
        for bd in d["bins"]:
            b = Bin(bd["id"])
            b.resident = {v: weights[v] for v in bd["resident"]}
            b.used = sum(b.resident.values())
            if b.used != bd["used_capacity"]:
                raise IntegrityError(f"bin {b.id}: stored used_capacity disagrees with residents")
            b.owned = set(bd["owned"])
            b.ghosts = set(bd["ghosts"])
            bins.append(b)
        for i, s in enumerate(d["subgraphs"]):
            bins[s["bin"]].subgraphs.append(i)
        # keep the stored execution order within each bin
        for b, bd in zip(bins, d["bins"]):
            pos = {repr(k): n for n, k in enumerate(bd.get("subgraphs", []))}
            b.subgraphs.sort(key=lambda i: pos.get(repr(sgs[i].key), len(pos)))
        cfg = PackingConfig.from_dict(d["config"]) if d.get("config") else None
        sol = cls(sgs, bins, d.get("heuristic", ""), cfg)
        for b in bins:
            for v in b.owned:
                sol.owner[v] = b.id
        return sol

    @classmethod
    def from_json(cls, text) -> "PackingSolution":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"PackingSolution({self.heuristic or 'custom'}, bins={self.num_bins}, subgraphs={len(self.subgraphs)})"


def solution_from_bins(subgraphs, bins, cfg: PackingConfig, heuristic: str) -> PackingSolution:
    sol = PackingSolution(subgraphs, bins, heuristic, cfg)
    return assign_ownership(sol)


def greedy_pack(ordered: Sequence[SubgraphOfInterest], cfg: PackingConfig) -> PackingSolution:
    """First-fit the subgraphs in exactly the order given."""
    items = [Cluster.of(sg, i) for i, sg in enumerate(ordered)]
    return solution_from_bins(ordered, greedy_bins(items, cfg), cfg, "greedy")


def assign_ownership(sol: PackingSolution) -> PackingSolution:
    """Each query vertex is owned by its subgraph's bin; other copies are ghosts.

    A non-query vertex resident in several bins is owned by the lowest bin id.
    """
    owner = {}
    for i, sg in enumerate(sol.subgraphs):
        owner.setdefault(sg.query_vertex, sol.assignment[i])
    home = {}
    for b in sol.bins:
        for v in b.resident:
            home.setdefault(v, b.id)
    for b in sol.bins:
        b.owned = {v for v, o in owner.items() if o == b.id}
        b.ghosts = {
            v for v in b.resident
            if (v in owner and owner[v] != b.id) or (v not in owner and home[v] != b.id)
        }
    sol.owner = owner
    return sol
