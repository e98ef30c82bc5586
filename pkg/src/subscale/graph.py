"""Immutable property graph, file loaders and the vertex weight estimator."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import ParseError, UnresolvedReferenceError

log = logging.getLogger(__name__)

EMPTY_RECORD: Mapping = MappingProxyType({})


def parse_value(text: str):
    """Typed scalar from its text form: int, float, bool, ``[a,b]`` set or str."""
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        if not inner:
            return frozenset()
        return frozenset(parse_value(t.strip()) for t in inner.split(","))
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass(frozen=True)
class WeightModel:
    """Additive memory estimator constants, in bytes.

    Strings count their UTF-8 length, numbers and booleans ``scalar_size``,
    set-valued attributes the sum of their elements.
    """

    vertex_overhead: int = 16
    edge_overhead: int = 8
    scalar_size: int = 8

    def encoded_size(self, value) -> int:
        if isinstance(value, str):
            return len(value.encode("utf-8"))
        if isinstance(value, (frozenset, set, tuple, list)):
            return sum(self.encoded_size(x) for x in value)
        return self.scalar_size


DEFAULT_WEIGHTS = WeightModel()


class PropertyGraph:
    """Adjacency-list graph with attribute records on vertices and edges.

    Directed graphs keep both out- and in-adjacency. For undirected graphs the
    two are the same mapping and every edge is listed at both endpoints.
    Instances are never mutated after construction; use :class:`GraphBuilder`.
    """

    def __init__(self, directed, out_adj, in_adj, vertex_attrs, counters=None):
        self.directed = directed
        self._out = out_adj
        self._in = in_adj if directed else out_adj
        self._vattrs = vertex_attrs
        self._vertices = tuple(sorted(out_adj))
        self._out_sorted = {v: tuple(sorted(nb)) for v, nb in out_adj.items()}
        if directed:
            self._in_sorted = {v: tuple(sorted(nb)) for v, nb in self._in.items()}
            self._nbr_sorted = {
                v: tuple(sorted(set(out_adj[v]) | set(self._in[v]))) for v in out_adj
            }
        else:
            self._in_sorted = self._out_sorted
            self._nbr_sorted = self._out_sorted
        arcs = sum(len(nb) for nb in out_adj.values())
        self.num_edges = arcs if directed else arcs // 2
        self.counters = Counter(counters or {})
        self.vertex_schema = frozenset(k for rec in vertex_attrs.values() for k in rec)
        self.edge_schema = frozenset(
            k for nb in out_adj.values() for rec in nb.values() for k in rec
        )

    # -- structure -------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self._vertices)

    def vertices(self) -> tuple:
        return self._vertices

    def __contains__(self, v) -> bool:
        return v in self._out

    def __len__(self) -> int:
        return len(self._vertices)

    def out_neighbors(self, v) -> tuple:
        return self._out_sorted[v]

    def in_neighbors(self, v) -> tuple:
        return self._in_sorted[v]

    def neighbors(self, v) -> tuple:
        """All adjacent vertices regardless of direction, ascending."""
        return self._nbr_sorted[v]

    def has_edge(self, u, v) -> bool:
        nb = self._out.get(u)
        return nb is not None and v in nb

    def edge_attrs(self, u, v) -> Mapping:
        return self._out[u][v]

    def incident(self, v) -> Iterator[tuple]:
        """(neighbor, edge record) for every incident edge, both directions."""
        yield from self._out[v].items()
        if self.directed:
            yield from self._in[v].items()

    def degree(self, v) -> int:
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._out[v])

    def out_degree(self, v) -> int:
        return len(self._out[v])

    def adjacency(self, v) -> list:
        """Ordered (neighbor, edge record, direction) triples."""
        if not self.directed:
            return [(w, self._out[v][w], "undirected") for w in self._out_sorted[v]]
        rows = [(w, self._out[v][w], "out") for w in self._out_sorted[v]]
        rows += [(w, self._in[v][w], "in") for w in self._in_sorted[v]]
        rows.sort(key=lambda r: (r[0], r[2] != "out"))
        return rows

    def edges(self) -> Iterator[tuple]:
        """Each edge once as (u, v, record); undirected edges have u < v."""
        for u in self._vertices:
            for v in self._out_sorted[u]:
                if self.directed or u < v:
                    yield u, v, self._out[u][v]

    def vertex_attrs(self, v) -> Mapping:
        return self._vattrs.get(v, EMPTY_RECORD)

    def canonical(self, with_attrs=False) -> tuple:
        """Sorted-adjacency form; equal for equal logical graphs."""
        if with_attrs:
            edges = tuple((u, v, tuple(sorted(r.items()))) for u, v, r in self.edges())
            verts = tuple((v, tuple(sorted(self.vertex_attrs(v).items()))) for v in self._vertices)
        else:
            edges = tuple((u, v) for u, v, _ in self.edges())
            verts = self._vertices
        return self.directed, verts, edges

    def __eq__(self, other):
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self.canonical(True) == other.canonical(True)

    __hash__ = None

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"PropertyGraph({kind}, |V|={self.num_vertices}, |E|={self.num_edges})"


class GraphBuilder:
    """Single-threaded ingestion helper; :meth:`build` freezes the result."""

    def __init__(self, directed=False):
        self.directed = directed
        self._out = {}
        self._in = {} if directed else self._out
        self._vattrs = {}
        self.counters = Counter()

    def add_vertex(self, v):
        if v not in self._out:
            self._out[v] = {}
            if self.directed:
                self._in[v] = {}

    def add_edge(self, u, v, attrs=None) -> bool:
        if u == v:
            self.add_vertex(u)
            self.counters["self_loops_dropped"] += 1
            return False
        self.add_vertex(u)
        self.add_vertex(v)
        if v in self._out[u]:
            self.counters["duplicate_edges"] += 1
            return False
        rec = MappingProxyType(dict(attrs)) if attrs else EMPTY_RECORD
        self._out[u][v] = rec
        self._in[v][u] = rec
        return True

    def set_vertex_attrs(self, v, attrs):
        self.add_vertex(v)
        self._vattrs[v] = dict(attrs)

    def build(self) -> PropertyGraph:
        vattrs = {v: MappingProxyType(r) for v, r in self._vattrs.items() if r}
        return PropertyGraph(self.directed, self._out, self._in, vattrs, self.counters)


def from_edges(edges: Iterable, directed=False, vertices: Iterable = (), vertex_attrs=None):
    """Build a graph from (u, v) or (u, v, record) tuples plus optional isolated vertices."""
    b = GraphBuilder(directed)
    for v in vertices:
        b.add_vertex(v)
    for e in edges:
        if len(e) == 3:
            b.add_edge(e[0], e[1], e[2])
        else:
            b.add_edge(e[0], e[1])
    for v, rec in (vertex_attrs or {}).items():
        b.set_vertex_attrs(v, rec)
    return b.build()


def _vertex_id(tok: str, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"vertex id {tok!r} is not an integer", lineno) from None
    if v < 0:
        raise ParseError(f"vertex id {v} is negative", lineno)
    return v


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def load_edge_list(path, directed=False) -> PropertyGraph:
    """Read ``src dst [weight]`` lines; the optional weight becomes edge attribute ``weight``."""
    b = GraphBuilder(directed)
    for lineno, line in _content_lines(path):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"expected 'src dst [weight]', got {line!r}", lineno)
        u = _vertex_id(parts[0], lineno)
        v = _vertex_id(parts[1], lineno)
        attrs = None
        if len(parts) == 3:
            w = parse_value(parts[2])
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise ParseError(f"edge weight {parts[2]!r} is not numeric", lineno)
            attrs = {"weight": w}
        b.add_edge(u, v, attrs)
    if b.counters["duplicate_edges"]:
        log.warning("%s: %d duplicate edges dropped", path, b.counters["duplicate_edges"])
    return b.build()


def load_adjacency_list(path, directed=False) -> PropertyGraph:
    """Read ``v: n1 n2 ...`` lines. Every neighbor must have its own line."""
    b = GraphBuilder(directed)
    pending = []
    for lineno, line in _content_lines(path):
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"expected 'v: n1 n2 ...', got {line!r}", lineno)
        v = _vertex_id(head.strip(), lineno)
        b.add_vertex(v)
        for tok in rest.split():
            pending.append((v, _vertex_id(tok, lineno), lineno))
    seen = set()
    for v, w, lineno in pending:
        if w not in b._out:
            raise UnresolvedReferenceError(f"line {lineno}: neighbor {w} of {v} has no adjacency line")
        if (v, w) in seen:
            b.counters["duplicate_edges"] += 1
            continue
        seen.add((v, w))
        if not directed and v in b._out[w]:
            continue  # the reverse listing of an undirected edge
        b.add_edge(v, w)
    return b.build()


def attach_attributes(graph: PropertyGraph, path, target="vertex", strict=False) -> PropertyGraph:
    """Return a copy of ``graph`` carrying the records of a ``id<TAB>k=v...`` file.

    Edge rows use ``src,dst`` as id. Unknown ids are skipped and counted
    unless ``strict``; a key assigned twice keeps the last value.
    """
    if target not in ("vertex", "edge"):
        raise ValueError(f"target must be 'vertex' or 'edge', not {target!r}")
    counters = Counter(graph.counters)
    updates = {}
    for lineno, line in _content_lines(path):
        fields = line.split("\t")
        ident = fields[0].strip()
        if target == "vertex":
            key = _vertex_id(ident, lineno)
            known = key in graph
        else:
            a, sep, c = ident.partition(",")
            if not sep:
                raise ParseError(f"edge id must be 'src,dst', got {ident!r}", lineno)
            key = (_vertex_id(a.strip(), lineno), _vertex_id(c.strip(), lineno))
            if not graph.directed and not graph.has_edge(*key):
                key = key[::-1]
            known = graph.has_edge(*key)
            if not graph.directed:
                key = (min(key), max(key))
        if not known:
            if strict:
                raise ParseError(f"{target} {ident} not in graph", lineno)
            counters["attribute_rows_skipped"] += 1
            continue
        rec = updates.setdefault(key, {})
        for kv in fields[1:]:
            kv = kv.strip()
            if not kv:
                continue
            k, sep, val = kv.partition("=")
            if not sep:
                raise ParseError(f"expected key=value, got {kv!r}", lineno)
            if k in rec:
                counters["attribute_overrides"] += 1
            rec[k] = parse_value(val)

    b = GraphBuilder(graph.directed)
    for v in graph.vertices():
        b.add_vertex(v)
        rec = dict(graph.vertex_attrs(v))
        if target == "vertex" and v in updates:
            for k in updates[v]:
                if k in rec:
                    counters["attribute_overrides"] += 1
            rec.update(updates[v])
        if rec:
            b.set_vertex_attrs(v, rec)
    for u, v, rec in graph.edges():
        rec = dict(rec)
        if target == "edge" and (u, v) in updates:
            rec.update(updates[(u, v)])
        b.add_edge(u, v, rec)
    b.counters = counters
    return b.build()


def write_edge_list(graph: PropertyGraph, path):
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, rec in graph.edges():
            w = rec.get("weight")
            fh.write(f"{u} {v}\n" if w is None else f"{u} {v} {w}\n")


def write_adjacency_list(graph: PropertyGraph, path):
    with open(path, "w", encoding="utf-8") as fh:
        for v in graph.vertices():
            fh.write(f"{v}:" + "".join(f" {w}" for w in graph.out_neighbors(v)) + "\n")


def vertex_weight(graph: PropertyGraph, v, vertex_attrs=(), edge_attrs=(),
                  retained=None, model: WeightModel = DEFAULT_WEIGHTS) -> int:
    """Estimated bytes to hold ``v``, its retained edges and projected attributes.

    ``retained`` lists the neighbors whose connecting edges survive filtering;
    ``None`` keeps every incident edge.
    """
    if retained is None:
        edges = list(graph.incident(v))
    else:
        keep = set(retained)
        edges = [(w, rec) for w, rec in graph.incident(v) if w in keep]
    weight = model.vertex_overhead + model.edge_overhead * len(edges)
    rec = graph.vertex_attrs(v)
    for a in vertex_attrs:
        if a in rec:
            weight += model.encoded_size(rec[a])
    if edge_attrs:
        for _, erec in edges:
            for a in edge_attrs:
                if a in erec:
                    weight += model.encoded_size(erec[a])
    return weight


def load_graph(path, fmt="edges", directed=False) -> PropertyGraph:
    path = Path(path)
    if fmt == "adjacency":
        return load_adjacency_list(path, directed)
    return load_edge_list(path, directed)
