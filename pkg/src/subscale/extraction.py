"""Declarative k-hop and attribute-induced subgraph extraction, plus sampling."""

from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import CapacityError, ConfigError, UnknownAttributeError
from .graph import DEFAULT_WEIGHTS, PropertyGraph, WeightModel, vertex_weight
from .predicates import Predicate

log = logging.getLogger(__name__)

SAMPLING_METHODS = ("none", "random-node", "random-walk", "custom")


@dataclass(frozen=True)
class SamplingPolicy:
    method: str = "none"
    target_ratio: float | None = None
    target_size: int | None = None
    seed: int = 0
    hook: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in SAMPLING_METHODS:
            raise ConfigError(f"unknown sampling method {self.method!r}")
        if self.target_ratio is not None and not 0 < self.target_ratio <= 1:
            raise ConfigError("target_ratio must lie in (0, 1]")
        if self.method == "custom" and self.hook is None:
            raise ConfigError("custom sampling needs a hook")

    def rng_for(self, query_vertex) -> random.Random:
        # per-subgraph stream: no shared rng state between workers
        return random.Random(self.seed * 1_000_003 + query_vertex)


@dataclass(frozen=True)
class ExtractionQuery:
    """Query vertices, radius, filters and projections for one extraction."""

    query_vertex_predicate: str = "true"
    k: int = 1
    vertex_filter: str = "true"
    edge_filter: str = "true"
    vertex_attrs: tuple = ()
    edge_attrs: tuple = ()
    mode: str = "neighborhood"
    induce_attribute: str | None = None
    sampling: SamplingPolicy = SamplingPolicy()
    exempt_query_vertex: bool = False

    def __post_init__(self):
        if self.k < 0:
            raise ConfigError("k must be non-negative")
        if self.mode not in ("neighborhood", "attribute-induced"):
            raise ConfigError(f"unknown extraction mode {self.mode!r}")
        if self.mode == "attribute-induced" and not self.induce_attribute:
            raise ConfigError("attribute-induced mode needs induce_attribute")
        object.__setattr__(self, "vertex_attrs", tuple(self.vertex_attrs))
        object.__setattr__(self, "edge_attrs", tuple(self.edge_attrs))
        object.__setattr__(self, "_pqv", Predicate(self.query_vertex_predicate))
        object.__setattr__(self, "_pv", Predicate(self.vertex_filter))
        object.__setattr__(self, "_pe", Predicate(self.edge_filter))

    @property
    def pqv(self) -> Predicate:
        return self._pqv

    @property
    def pv(self) -> Predicate:
        return self._pv

    @property
    def pe(self) -> Predicate:
        return self._pe

    def validate(self, graph: PropertyGraph):
        self.pqv.check_schema(graph.vertex_schema, "vertex attribute")
        self.pv.check_schema(graph.vertex_schema, "vertex attribute")
        self.pe.check_schema(graph.edge_schema, "edge attribute")

    def to_dict(self) -> dict:
        s = self.sampling
        return {
            "query_vertex_predicate": self.query_vertex_predicate,
            "k": self.k,
            "vertex_filter": self.vertex_filter,
            "edge_filter": self.edge_filter,
            "vertex_attrs": list(self.vertex_attrs),
            "edge_attrs": list(self.edge_attrs),
            "mode": self.mode,
            "induce_attribute": self.induce_attribute,
            "exempt_query_vertex": self.exempt_query_vertex,
            "sampling": {
                "method": s.method,
                "target_ratio": s.target_ratio,
                "target_size": s.target_size,
                "seed": s.seed,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExtractionQuery":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown query fields: {', '.join(sorted(extra))}")
        if "sampling" in d and d["sampling"] is not None:
            d["sampling"] = SamplingPolicy(**d["sampling"])
        elif "sampling" in d:
            del d["sampling"]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExtractionQuery":
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"bad query document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class SubgraphOfInterest:
    """A query vertex with its member vertices and their weights."""

    __slots__ = ("query_vertex", "weights", "members", "size", "truncated", "label")

    def __init__(self, query_vertex, weights: Mapping, truncated=False, label=None):
        self.query_vertex = query_vertex
        self.weights = dict(weights)
        self.members = frozenset(self.weights)
        self.size = sum(self.weights.values())
        self.truncated = truncated
        self.label = label

    @property
    def key(self):
        """Result key: the query vertex, or the attribute value for induced subgraphs."""
        return self.query_vertex if self.label is None else self.label

    def restricted(self, keep) -> "SubgraphOfInterest":
        keep = set(keep)
        return SubgraphOfInterest(
            self.query_vertex,
            {v: w for v, w in self.weights.items() if v in keep},
            self.truncated,
            self.label,
        )

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        if not isinstance(other, SubgraphOfInterest):
            return NotImplemented
        return (self.query_vertex, self.weights, self.label) == (
            other.query_vertex, other.weights, other.label)

    __hash__ = None

    def __repr__(self):
        return f"SubgraphOfInterest(qv={self.query_vertex}, |V|={len(self.members)}, size={self.size})"


class Extractor:
    """Evaluates one query against one graph, caching filter results and weights."""

    def __init__(self, graph: PropertyGraph, query: ExtractionQuery,
                 weight_model: WeightModel = DEFAULT_WEIGHTS):
        query.validate(graph)
        self.graph = graph
        self.query = query
        self.model = weight_model
        self._passes = {}
        self._weights = {}

    def passes_vertex(self, v) -> bool:
        ok = self._passes.get(v)
        if ok is None:
            ok = self._passes[v] = self.query.pv(self.graph.vertex_attrs(v))
        return ok

    def passes_edge(self, rec) -> bool:
        return self.query.pe(rec)

    def filtered_neighbors(self, v) -> list:
        """Neighbors reachable from v over a passing edge, that pass the vertex filter."""
        g = self.graph
        pe = self.query.pe
        if pe.trivial:
            return [w for w in g.neighbors(v) if self.passes_vertex(w)]
        out = []
        for w in g.neighbors(v):
            if not self.passes_vertex(w):
                continue
            if pe(g.edge_attrs(v, w)) if g.has_edge(v, w) else False:
                out.append(w)
            elif g.directed and g.has_edge(w, v) and pe(g.edge_attrs(w, v)):
                out.append(w)
        return out

    def weight(self, v) -> int:
        w = self._weights.get(v)
        if w is None:
            q = self.query
            w = vertex_weight(self.graph, v, q.vertex_attrs, q.edge_attrs,
                              retained=self.filtered_neighbors(v), model=self.model)
            self._weights[v] = w
        return w


def select_query_vertices(graph: PropertyGraph, query: ExtractionQuery) -> list:
    """Vertices satisfying the query-vertex predicate, ascending."""
    query.validate(graph)
    pqv = query.pqv
    return [v for v in graph.vertices() if pqv(graph.vertex_attrs(v))]


def _bfs(ex: Extractor, qv, k) -> list:
    seen = {qv}
    order = [qv]
    frontier = [qv]
    for _ in range(k):
        nxt = []
        for u in frontier:
            for w in ex.filtered_neighbors(u):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return order


def extract_khop(graph, query: ExtractionQuery, qv, extractor: Extractor | None = None):
    """Filtered k-hop neighborhood of ``qv``.

    Returns ``None`` when ``qv`` itself fails the vertex filter and the query
    does not exempt query vertices.
    """
    ex = extractor or Extractor(graph, query)
    if not query.exempt_query_vertex and not ex.passes_vertex(qv):
        return None
    members = _bfs(ex, qv, query.k)
    return SubgraphOfInterest(qv, {v: ex.weight(v) for v in members})


def extract_attribute_induced(graph: PropertyGraph, attribute: str, query: ExtractionQuery | None = None,
                              weight_model: WeightModel = DEFAULT_WEIGHTS) -> list:
    """One subgraph per distinct value of ``attribute``; set values fan out."""
    if attribute not in graph.vertex_schema:
        raise UnknownAttributeError(f"vertex attribute {attribute!r} not in schema")
    query = query or ExtractionQuery(mode="attribute-induced", induce_attribute=attribute)
    ex = Extractor(graph, query, weight_model)
    groups = {}
    for v in graph.vertices():
        if not ex.passes_vertex(v):
            continue
        val = graph.vertex_attrs(v).get(attribute)
        if val is None:
            continue
        vals = val if isinstance(val, (frozenset, set, tuple, list)) else (val,)
        for x in vals:
            groups.setdefault(x, []).append(v)
    out = []
    for val in sorted(groups, key=lambda x: (type(x).__name__, x)):
        vs = groups[val]
        out.append(SubgraphOfInterest(min(vs), {v: ex.weight(v) for v in vs}, label=val))
    return out


def sample_random_node(sg: SubgraphOfInterest, policy: SamplingPolicy) -> SubgraphOfInterest:
    """Keep each non-query member independently with probability ``target_ratio``."""
    ratio = policy.target_ratio if policy.target_ratio is not None else 1.0
    rng = policy.rng_for(sg.query_vertex)
    keep = [v for v in sorted(sg.members) if v == sg.query_vertex or rng.random() < ratio]
    return sg.restricted(keep)


def sample_random_node_to_budget(sg: SubgraphOfInterest, budget: int, policy: SamplingPolicy):
    """Visit non-query members in random order, keeping each that still fits ``budget``."""
    rng = policy.rng_for(sg.query_vertex)
    others = sorted(v for v in sg.members if v != sg.query_vertex)
    rng.shuffle(others)
    total = sg.weights[sg.query_vertex]
    keep = [sg.query_vertex]
    for v in others:
        if total + sg.weights[v] <= budget:
            keep.append(v)
            total += sg.weights[v]
    return sg.restricted(keep)


def sample_random_walk(sg: SubgraphOfInterest, graph: PropertyGraph, policy: SamplingPolicy,
                       edge_filter: Predicate | None = None) -> SubgraphOfInterest:
    """Distinct vertices visited by a walk from the query vertex inside the subgraph.

    Stuck walks jump back to the query vertex; after ``10 * target`` steps the
    walk stops and the result is flagged ``truncated``.
    """
    target = policy.target_size
    if target is None:
        ratio = policy.target_ratio if policy.target_ratio is not None else 1.0
        target = max(1, round(ratio * len(sg.members)))
    target = min(target, len(sg.members))
    rng = policy.rng_for(sg.query_vertex)
    members = sg.members

    def moves(u):
        out = []
        for w in graph.neighbors(u):
            if w not in members:
                continue
            if edge_filter is not None and not edge_filter.trivial:
                rec = graph.edge_attrs(u, w) if graph.has_edge(u, w) else graph.edge_attrs(w, u)
                if not edge_filter(rec):
                    continue
            out.append(w)
        return out

    cache = {}
    qv = sg.query_vertex
    visited = {qv}
    cur = qv
    steps = 0
    budget = 10 * target
    while len(visited) < target and steps < budget:
        nxt = cache.get(cur)
        if nxt is None:
            nxt = cache[cur] = moves(cur)
        cur = rng.choice(nxt) if nxt else qv
        visited.add(cur)
        steps += 1
    out = sg.restricted(visited)
    out.truncated = len(visited) < target
    return out


def apply_sampling(sg, graph, query: ExtractionQuery, capacity=None):
    """Sample ``sg`` per the query's policy, only when it exceeds ``capacity``."""
    policy = query.sampling
    if policy.method == "none" or capacity is None or sg.size <= capacity:
        return sg
    if policy.method == "random-node":
        if policy.target_ratio is None:
            return sample_random_node_to_budget(sg, capacity, policy)
        return sample_random_node(sg, policy)
    if policy.method == "random-walk":
        return sample_random_walk(sg, graph, policy, query.pe)
    return policy.hook(sg, graph, policy)


def extract_subgraphs(graph: PropertyGraph, query: ExtractionQuery, bin_capacity=None,
                      workers=1, weight_model: WeightModel = DEFAULT_WEIGHTS) -> list:
    """All subgraphs of interest, in ascending query-vertex order.

    Subgraphs larger than ``bin_capacity`` are sampled per the query's policy;
    one still too large after sampling raises :class:`CapacityError`.
    """
    if query.mode == "attribute-induced":
        sgs = extract_attribute_induced(graph, query.induce_attribute, query, weight_model)
    else:
        ex = Extractor(graph, query, weight_model)
        qvs = select_query_vertices(graph, query)
        if workers > 1 and len(qvs) > 1:
            with ThreadPoolExecutor(workers) as pool:
                sgs = list(pool.map(lambda v: extract_khop(graph, query, v, ex), qvs))
        else:
            sgs = [extract_khop(graph, query, v, ex) for v in qvs]
        dropped = sum(1 for s in sgs if s is None)
        if dropped:
            log.info("%d query vertices fail the vertex filter and were dropped", dropped)
        sgs = [s for s in sgs if s is not None]
    if bin_capacity is not None:
        sgs = [apply_sampling(s, graph, query, bin_capacity) for s in sgs]
        for s in sgs:
            if s.size > bin_capacity:
                raise CapacityError(
                    f"subgraph of {s.query_vertex} has size {s.size} > bin capacity "
                    f"{bin_capacity}; configure a sampling policy"
                )
    return sgs
