"""Bulk-synchronous iteration over packed partitions with ghost-copy refresh.

Each partition keeps a local state table for all its residents. In a
superstep every subgraph program reads the committed table and stages a new
value for its query vertex. At the barrier owners commit staged values; any
changed value of a query vertex that is a ghost elsewhere is published once to
the update store, and every ghost copy is then refreshed from it. Reads only
ever see values committed in earlier supersteps, which makes the result
independent of how subgraphs were packed.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .engine.executor import build_runners
from .errors import ConsistencyError, ContractViolation

log = logging.getLogger(__name__)


class UpdateStore:
    """Staging area between partitions: writes become readable only after :meth:`commit`."""

    def __init__(self):
        self.committed = {}
        self.pending = {}
        self.messages = 0

    def publish(self, v, value):
        self.pending[v] = value
        self.messages += 1

    def commit(self) -> set:
        changed = set(self.pending)
        self.committed.update(self.pending)
        self.pending = {}
        return changed

    def fetch(self, v):
        try:
            return self.committed[v]
        except KeyError:
            raise ConsistencyError(f"no stored value for ghosted vertex {v}") from None


class CountingBarrier:
    """All partitions must arrive before a superstep may close."""

    def __init__(self, parties):
        self.parties = parties
        self.arrived = 0
        self.generation = 0

    def arrive(self):
        self.arrived += 1
        if self.arrived > self.parties:
            raise ContractViolation("more arrivals than partitions at the barrier")

    def release(self):
        if self.arrived != self.parties:
            raise ContractViolation(f"barrier released with {self.arrived}/{self.parties} partitions")
        self.arrived = 0
        self.generation += 1


@dataclass
class BspResult:
    states: dict
    supersteps: int
    converged_at: int
    converged: bool
    metrics: list = field(default_factory=list)
    store_messages: int = 0
    ghost_refreshes: int = 0
    errors: dict = field(default_factory=dict)
    owned_by_partition: list = field(default_factory=list)
    build_secs: float = 0.0

    def aggregate(self, op, zero, message=None):
        """Fold per-vertex messages: first within each partition, then across partitions.

        ``op`` must be associative and commutative. Each owned vertex sends
        ``message(v, state)``, or just its state when ``message`` is None.
        """
        total = zero
        for owned in self.owned_by_partition:
            if message is None:
                part = [self.states[v] for v in sorted(owned)]
            else:
                part = [message(v, self.states[v]) for v in sorted(owned)]
            acc = zero
            for v in part:
                acc = op(acc, v)
            total = op(total, acc)
        return total


def run_bsp(graph, solution, program, query=None, mode="batched", batch_size=64, workers=1,
            bitmap="word", max_supersteps=1000) -> BspResult:
    """Iterate ``program.step`` until no query vertex changes (or ``max_supersteps``)."""
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        t0 = time.perf_counter()
        runners = build_runners(graph, solution, query, mode, batch_size, workers, bitmap, pool)
        built = time.perf_counter() - t0
        result = _iterate(runners, solution, program, max_supersteps)
        result.build_secs = built
        return result
    finally:
        if pool is not None:
            pool.shutdown()


def _iterate(runners, solution, program, max_supersteps):
    n_parts = len(runners)
    tables = [{v: program.initial(v) for v in r.pg.vertices} for r in runners]
    # who needs a fresh copy of each owned query vertex
    ghosted_in = {}
    for p, r in enumerate(runners):
        for g in r.pg.ghosts:
            owner = solution.owner.get(g)
            if owner is not None and owner != p:
                ghosted_in.setdefault(g, []).append(p)
    store = UpdateStore()
    for v in ghosted_in:
        store.committed[v] = tables[solution.owner[v]][v]
    barrier = CountingBarrier(n_parts)

    def stepper(view):
        view.write_state(program.step(view))

    metrics = []
    errors = {}
    refreshes_total = 0
    converged_at = 0
    converged = False
    step = 0
    while step < max_supersteps:
        step += 1
        t0 = time.perf_counter()
        staged = []
        for p, r in enumerate(runners):
            out = {}
            _, err, vio, _, _, _ = r.run(stepper, staged=out, reader=tables[p].__getitem__)
            if vio:
                key, exc = vio[0]
                raise type(exc)(f"superstep {step}, subgraph {key}: {exc}")
            errors.update(err)
            staged.append(out)
            barrier.arrive()
        t1 = time.perf_counter()

        changed = 0
        sent_before = store.messages
        for p in range(n_parts):
            table = tables[p]
            for v, val in staged[p].items():
                if solution.owner.get(v) != p:
                    raise ContractViolation(f"partition {p} wrote state for {v}, which it does not own")
                if table[v] != val:
                    table[v] = val
                    changed += 1
                    if v in ghosted_in:
                        store.publish(v, val)
        store.commit()
        barrier.release()
        t2 = time.perf_counter()

        refreshes = 0
        for v, parts in ghosted_in.items():
            val = store.fetch(v)
            for p in parts:
                tables[p][v] = val
                refreshes += 1
        refreshes_total += refreshes
        t3 = time.perf_counter()

        metrics.append({
            "superstep": step,
            "compute_ms": (t1 - t0) * 1e3,
            "barrier_ms": (t2 - t1) * 1e3,
            "message_ms": (t3 - t2) * 1e3,
            "changed": changed,
            "store_messages": store.messages - sent_before,
            "ghost_refreshes": refreshes,
        })
        if changed:
            converged_at = step
        else:
            converged = True
            break
    if not converged:
        log.warning("no fixpoint after %d supersteps", max_supersteps)
    states = {}
    for p, r in enumerate(runners):
        for v in r.pg.owned:
            states[v] = tables[p][v]
    return BspResult(states, step, converged_at, converged, metrics, store.messages,
                     refreshes_total, errors, [set(r.pg.owned) for r in runners])
