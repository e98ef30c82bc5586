"""Run a user program once per subgraph, scoped by bitmaps, in one of three modes.

serial   one bit per element; subgraphs run one at a time, bits set and cleared around each.
vector   one bit per subgraph per element; all bits set up front, all subgraphs in one dispatch.
batched  ``min(B, S)`` bits per element; subgraphs run B at a time with a barrier after each
         batch, after which only the elements the batch touched are reset.
"""

from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import ConfigError, ContractViolation
from .bitmaps import BITMAP_KINDS, make_bitmap
from .partition import PartitionGraph
from .view import SubgraphView

log = logging.getLogger(__name__)

MODES = ("serial", "vector", "batched")


@dataclass
class ExecutionStats:
    mode: str
    workers: int
    batch_size: int | None
    bitmap: str
    batches: int = 0
    tasks: int = 0
    busy_secs: float = 0.0
    peak_live_bits: int = 0
    peak_bitmap_bytes: int = 0
    partitions: list = field(default_factory=list)


@dataclass
class ExecutionResult:
    results: dict
    errors: dict
    states: dict
    stats: ExecutionStats


def slot_width(mode: str, num_subgraphs: int, batch_size: int | None) -> int:
    if num_subgraphs == 0:
        return 0
    if mode == "serial":
        return 1
    if mode == "vector":
        return num_subgraphs
    return min(batch_size, num_subgraphs)


class PartitionRunner:
    """Bitmaps and scheduling for one partition; can run several programs in turn."""

    def __init__(self, pg: PartitionGraph, mode="batched", batch_size=64, workers=1,
                 bitmap="word", pool=None):
        if mode not in MODES:
            raise ConfigError(f"unknown execution mode {mode!r}; pick one of {', '.join(MODES)}")
        if bitmap not in BITMAP_KINDS:
            raise ConfigError(f"unknown bitmap kind {bitmap!r}")
        if mode == "batched" and (batch_size is None or batch_size < 1):
            raise ConfigError("batched mode needs a positive batch size")
        self.pg = pg
        self.mode = mode
        self.batch_size = batch_size
        self.workers = max(1, workers)
        self.pool = pool
        self.width = slot_width(mode, len(pg.subgraphs), batch_size)
        self.vbits = [make_bitmap(bitmap, self.width) for _ in range(pg.num_vertices)]
        self.ebits = [make_bitmap(bitmap, self.width) for _ in range(pg.num_edges)]
        self.live_bits = self.width * pg.num_elements
        self.peak_bytes = 0
        if mode == "vector":
            for j in range(len(pg.subgraphs)):
                self._mark(j, j)
            self._note_bytes()

    def _mark(self, j, slot):
        for i in self.pg.members[j]:
            self.vbits[i].set(slot)
        for e in self.pg.induced[j]:
            self.ebits[e].set(slot)

    def _note_bytes(self):
        b = sum(x.memory_estimate() for x in self.vbits) + sum(x.memory_estimate() for x in self.ebits)
        self.peak_bytes = max(self.peak_bytes, b)

    def run(self, program, staged=None, reader=None):
        """Run ``program`` on every subgraph; returns (results, errors, violations, busy, batches, tasks)."""
        pg = self.pg
        results, errors, violations = {}, {}, []
        busy = []

        def one(j, slot):
            sg = pg.subgraphs[j]
            view = SubgraphView(pg, j, slot, self.vbits, self.ebits, staged, reader)
            try:
                results[sg.key] = program(view)
            except ContractViolation as exc:
                violations.append((sg.key, exc))
            except Exception as exc:  # recorded per subgraph, never fatal
                errors[sg.key] = exc
            finally:
                view.close()

        def dispatch(items):
            """Work-stealing over ``items`` = [(subgraph, slot)]; returns tasks used."""
            n_tasks = min(self.workers, len(items))
            if self.pool is None:
                t0 = time.perf_counter()
                for j, slot in items:
                    one(j, slot)
                busy.append(time.perf_counter() - t0)
                return 1
            cursor = [0]
            lock = threading.Lock()

            def task():
                t0 = time.perf_counter()
                while True:
                    with lock:
                        k = cursor[0]
                        cursor[0] += 1
                    if k >= len(items):
                        break
                    one(*items[k])
                return time.perf_counter() - t0

            futures = [self.pool.submit(task) for _ in range(n_tasks)]
            busy.extend(f.result() for f in futures)  # barrier
            return n_tasks

        S = len(pg.subgraphs)
        batches = tasks = 0
        if self.mode == "vector":
            if S:
                tasks += dispatch([(j, j) for j in range(S)])
                batches = 1
        elif self.mode == "serial":
            t0 = time.perf_counter()
            for j in range(S):
                self._mark(j, 0)
                if j == 0:
                    self._note_bytes()
                one(j, 0)
                for i in pg.members[j]:
                    self.vbits[i].clear(0)
                for e in pg.induced[j]:
                    self.ebits[e].clear(0)
            busy.append(time.perf_counter() - t0)
            batches, tasks = S, 1 if S else 0
        else:
            w = self.width
            for start in range(0, S, w):
                chunk = range(start, min(S, start + w))
                dirty_v, dirty_e = set(), set()
                for slot, j in enumerate(chunk):
                    self._mark(j, slot)
                    dirty_v.update(pg.members[j])
                    dirty_e.update(pg.induced[j])
                if start == 0:
                    self._note_bytes()
                tasks += dispatch([(j, slot) for slot, j in enumerate(chunk)])
                for i in dirty_v:
                    self.vbits[i].clear_all()
                for e in dirty_e:
                    self.ebits[e].clear_all()
                batches += 1
        return results, errors, violations, busy, batches, tasks


def build_runners(graph, solution, query=None, mode="batched", batch_size=64, workers=1,
                  bitmap="word", pool=None) -> list:
    runners = []
    for b in solution.bins:
        sgs = [solution.subgraphs[i] for i in b.subgraphs]
        pg = PartitionGraph(graph, b, sgs, query)
        runners.append(PartitionRunner(pg, mode, batch_size, workers, bitmap, pool))
    return runners


def execute(graph, solution, program, mode="batched", batch_size=64, workers=1, bitmap="word",
            query=None) -> ExecutionResult:
    """Run ``program(view)`` for every subgraph of every bin.

    Results are keyed by subgraph key. Ordinary exceptions are collected per
    subgraph in ``errors``; a scope or lifecycle violation is raised as
    :class:`ContractViolation` once every partition has finished.
    """
    stats = ExecutionStats(mode, workers, batch_size if mode == "batched" else None, bitmap)
    results, errors, states = {}, {}, {}
    violations = []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for b in solution.bins:
            t0 = time.perf_counter()
            sgs = [solution.subgraphs[i] for i in b.subgraphs]
            pg = PartitionGraph(graph, b, sgs, query)
            runner = PartitionRunner(pg, mode, batch_size, workers, bitmap, pool)
            t1 = time.perf_counter()
            res, err, vio, busy, batches, tasks = runner.run(program, staged=states)
            t2 = time.perf_counter()
            results.update(res)
            errors.update(err)
            violations.extend(vio)
            stats.batches += batches
            stats.tasks += tasks
            stats.busy_secs += sum(busy)
            stats.peak_live_bits = max(stats.peak_live_bits, runner.live_bits)
            stats.peak_bitmap_bytes = max(stats.peak_bitmap_bytes, runner.peak_bytes)
            stats.partitions.append({
                "bin": b.id,
                "vertices": pg.num_vertices,
                "edges": pg.num_edges,
                "subgraphs": len(sgs),
                "width": runner.width,
                "live_bits": runner.live_bits,
                "resident_bytes": b.used,
                "bitmap_bytes": runner.peak_bytes,
                "build_secs": t1 - t0,
                "run_secs": t2 - t1,
                "busy_secs": sum(busy),
            })
    finally:
        if pool is not None:
            pool.shutdown()
    if violations:
        key, exc = violations[0]
        raise type(exc)(f"{len(violations)} program(s) broke the view contract; first, for {key}: {exc}")
    if errors:
        log.warning("%d subgraph programs raised", len(errors))
    return ExecutionResult(results, errors, states, stats)
