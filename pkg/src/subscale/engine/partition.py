"""Local, densely indexed copy of one bin's residents and the edges among them."""

from __future__ import annotations

from ..errors import IntegrityError
from ..graph import PropertyGraph


class PartitionGraph:
    """Residents of a bin, re-indexed ``0..n-1`` in ascending id order.

    Only edges passing the edge filter are kept. ``adj[i]`` maps a local
    neighbor index to the local edge id; for directed graphs ``out_adj`` and
    ``in_adj`` are separate and ``adj`` is their union. Each subgraph gets the
    sorted local indices of its members and of its induced edges.
    """

    def __init__(self, graph: PropertyGraph, bin, subgraphs, query=None, bin_id=None):
        self.graph = graph
        self.directed = graph.directed
        self.bin_id = bin.id if bin_id is None else bin_id
        self.vertices = sorted(bin.resident)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.owned = set(bin.owned)
        self.ghosts = set(bin.ghosts)
        pe = query.pe if query is not None and not query.pe.trivial else None
        # without a query every attribute is visible; with one, only its projections
        self.vertex_attr_names = None if query is None else frozenset(query.vertex_attrs)
        self.edge_attr_names = None if query is None else frozenset(query.edge_attrs)

        n = len(self.vertices)
        idx = self.index
        self.edges = []
        self.out_adj = [dict() for _ in range(n)]
        self.in_adj = [dict() for _ in range(n)] if self.directed else self.out_adj
        for i, u in enumerate(self.vertices):
            nbrs = graph.out_neighbors(u) if self.directed else graph.neighbors(u)
            for w in nbrs:
                j = idx.get(w)
                if j is None or (not self.directed and j <= i):
                    continue
                if pe is not None and not pe(graph.edge_attrs(u, w)):
                    continue
                eid = len(self.edges)
                self.edges.append((i, j))
                self.out_adj[i][j] = eid
                self.in_adj[j][i] = eid
        if self.directed:
            self.adj = []
            for i in range(n):
                merged = dict(self.in_adj[i])
                merged.update(self.out_adj[i])
                self.adj.append(merged)
        else:
            self.adj = self.out_adj

        self.subgraphs = list(subgraphs)
        self.members = []
        self.induced = []
        for sg in self.subgraphs:
            missing = [v for v in sg.members if v not in idx]
            if missing:
                raise IntegrityError(
                    f"bin {self.bin_id} lacks {len(missing)} member(s) of the subgraph of {sg.query_vertex}"
                )
            mem = sorted(idx[v] for v in sg.members)
            mset = set(mem)
            es = []
            for i in mem:
                for j, eid in self.out_adj[i].items():
                    if j in mset and (self.directed or j > i):
                        es.append(eid)
            es.sort()
            self.members.append(mem)
            self.induced.append(es)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_elements(self) -> int:
        return len(self.vertices) + len(self.edges)

    def edge_id(self, u, v):
        """Local edge id for global ids (u, v); undirected lookups ignore order."""
        i = self.index.get(u)
        j = self.index.get(v)
        if i is None or j is None:
            return None
        return self.out_adj[i].get(j)

    def vertex_attr(self, v, name):
        if self.vertex_attr_names is not None and name not in self.vertex_attr_names:
            raise KeyError(f"vertex attribute {name!r} was not projected")
        return self.graph.vertex_attrs(v)[name]

    def edge_attr(self, u, v, name):
        if self.edge_attr_names is not None and name not in self.edge_attr_names:
            raise KeyError(f"edge attribute {name!r} was not projected")
        return self.graph.edge_attrs(u, v)[name]
