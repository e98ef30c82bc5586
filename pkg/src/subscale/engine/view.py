"""The handle a user program gets: a graph API scoped to one subgraph's bitmap slot."""

from __future__ import annotations

from ..errors import ContractViolation, LifecycleError, ScopeError


class SubgraphView:
    """Read access to one subgraph; every lookup is checked against its slot bits.

    Vertices and edges of the partition outside the subgraph raise
    :class:`ScopeError`. The only writable cell is the query vertex's state
    slot. Any use after :meth:`close` raises :class:`LifecycleError`.
    """

    __slots__ = ("_pg", "_slot", "_vbits", "_ebits", "_sg_index", "_sg", "_open",
                 "_staged", "_reader", "_qv")

    def __init__(self, pg, sg_index, slot, vbits, ebits, staged=None, reader=None):
        self._pg = pg
        self._sg_index = sg_index
        self._sg = pg.subgraphs[sg_index]
        self._slot = slot
        self._vbits = vbits
        self._ebits = ebits
        self._staged = staged
        self._reader = reader
        self._qv = self._sg.query_vertex
        self._open = True

    # -- lifecycle -------------------------------------------------------

    def _live(self):
        if not self._open:
            raise LifecycleError("subgraph view used after its program returned")

    def close(self):
        self._open = False

    @property
    def closed(self) -> bool:
        return not self._open

    # -- scope helpers -----------------------------------------------------

    def _local(self, v) -> int:
        i = self._pg.index.get(v)
        if i is None or not self._vbits[i].test(self._slot):
            raise ScopeError(f"vertex {v} is not in the subgraph of {self._qv}")
        return i

    def _visible(self, i) -> bool:
        return self._vbits[i].test(self._slot)

    def _edge_visible(self, eid) -> bool:
        return self._ebits[eid].test(self._slot)

    # -- graph API ---------------------------------------------------------

    @property
    def query_vertex(self):
        self._live()
        return self._qv

    @property
    def key(self):
        self._live()
        return self._sg.key

    @property
    def directed(self) -> bool:
        return self._pg.directed

    def vertices(self) -> list:
        self._live()
        verts = self._pg.vertices
        return [verts[i] for i in self._pg.members[self._sg_index]]

    def num_vertices(self) -> int:
        self._live()
        return len(self._pg.members[self._sg_index])

    def __contains__(self, v) -> bool:
        self._live()
        i = self._pg.index.get(v)
        return i is not None and self._visible(i)

    def edges(self) -> list:
        """(u, v) pairs of the induced edges; u < v for undirected graphs."""
        self._live()
        verts = self._pg.vertices
        es = self._pg.edges
        return [(verts[es[e][0]], verts[es[e][1]]) for e in self._pg.induced[self._sg_index]]

    def num_edges(self) -> int:
        self._live()
        return len(self._pg.induced[self._sg_index])

    def _scoped(self, table, v) -> list:
        i = self._local(v)
        verts = self._pg.vertices
        return [verts[j] for j, e in sorted(table[i].items())
                if self._visible(j) and self._edge_visible(e)]

    def neighbors(self, v) -> list:
        """Visible neighbors over visible edges, ascending; both directions when directed."""
        self._live()
        return self._scoped(self._pg.adj, v)

    def out_neighbors(self, v) -> list:
        self._live()
        return self._scoped(self._pg.out_adj, v)

    def in_neighbors(self, v) -> list:
        self._live()
        return self._scoped(self._pg.in_adj, v)

    def degree(self, v) -> int:
        return len(self.neighbors(v))

    def has_edge(self, u, v) -> bool:
        """Scoped edge test: both endpoints and the edge must be in the subgraph."""
        self._live()
        i = self._local(u)
        j = self._local(v)
        e = self._pg.out_adj[i].get(j)
        return e is not None and self._edge_visible(e)

    def neighbor(self, v, e) -> object:
        """Other endpoint of edge ``e`` (a pair containing ``v``)."""
        self._live()
        a, b = e
        if not self.has_edge(a, b):
            raise ScopeError(f"edge {e} is not in the subgraph of {self._qv}")
        if v == a:
            return b
        if v == b:
            return a
        raise ScopeError(f"vertex {v} is not an endpoint of {e}")

    def attr(self, v, name):
        self._live()
        self._local(v)
        return self._pg.vertex_attr(v, name)

    def edge_attr(self, u, v, name):
        if not self.has_edge(u, v):
            raise ScopeError(f"edge ({u}, {v}) is not in the subgraph of {self._qv}")
        return self._pg.edge_attr(u, v, name)

    # -- state -------------------------------------------------------------

    def write_state(self, value):
        """Set the query vertex's state for this step; no other slot is writable."""
        self._live()
        if self._staged is None:
            raise ContractViolation("this execution has no state table")
        self._staged[self._qv] = value

    def state(self, v):
        """Committed state of a visible vertex from the previous step (None if unset)."""
        self._live()
        self._local(v)
        if self._reader is None:
            raise ContractViolation("this execution has no state table")
        return self._reader(v)

    def __repr__(self):
        return f"SubgraphView(qv={self._qv}, slot={self._slot}, open={self._open})"
