"""Run accounting (effort, memory, elapsed time) and the packing comparison harness."""

from __future__ import annotations

import json
import resource
import statistics
import time
import tracemalloc
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, InstanceTooLargeError
from .extraction import extract_subgraphs
from .gep import gep
from .packing import PackingConfig, pack


def _spread(values) -> dict:
    if not values:
        return {"count": 0, "min": None, "median": None, "max": None}
    return {
        "count": len(values),
        "min": min(values),
        "median": statistics.median(values),
        "max": max(values),
    }


def peak_rss_bytes() -> int:
    """Peak resident set size of this process (Linux reports KiB)."""
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


@dataclass
class RunReport:
    """Effort is the summed busy time of every emulated node, in node-seconds."""

    ce_node_secs: float
    peak_memory_bytes: int
    peak_rss_bytes: int
    elapsed_secs: float
    phases: dict
    bins: int
    subgraphs: int
    subgraphs_per_bin: list = field(default_factory=list)
    runtime_per_bin: list = field(default_factory=list)
    supersteps: list = field(default_factory=list)

    def bin_stats(self) -> dict:
        return {
            "subgraphs": _spread(self.subgraphs_per_bin),
            "runtime_secs": _spread(self.runtime_per_bin),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bin_stats"] = self.bin_stats()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)


def measure_run(graph, query, cfg: PackingConfig, program=None, *, gep_mode="centralized", shards=4,
                mode="batched", batch_size=3000, workers=1, bitmap="word", iterative=False,
                max_supersteps=1000, load_secs=0.0):
    """Extract, pack, materialize and execute, timing each phase.

    Returns ``(report, outcome)`` where ``outcome`` is the execution (or BSP)
    result. ``program`` is a per-subgraph callable, or for ``iterative`` runs
    an object with ``initial`` and ``step``.
    """
    from .bsp import run_bsp
    from .engine import execute

    t_start = time.perf_counter() - load_secs
    t0 = time.perf_counter()
    if gep_mode == "distributed":
        res = gep(graph, query, cfg, shards=shards)
        solution = res.solution
    elif gep_mode == "centralized":
        sgs = extract_subgraphs(graph, query, cfg.bin_capacity)
        solution = pack(sgs, cfg, graph)
    else:
        raise ConfigError(f"unknown gep mode {gep_mode!r}")
    gep_secs = time.perf_counter() - t0

    if program is None:
        elapsed = time.perf_counter() - t_start
        report = RunReport(
            ce_node_secs=load_secs + gep_secs,
            peak_memory_bytes=max((b.used for b in solution.bins), default=0),
            peak_rss_bytes=peak_rss_bytes(),
            elapsed_secs=elapsed,
            phases={"load": load_secs, "gep": gep_secs, "shuffle": 0.0, "execute": 0.0},
            bins=solution.num_bins,
            subgraphs=len(solution.subgraphs),
            subgraphs_per_bin=[len(b.subgraphs) for b in solution.bins],
        )
        return report, solution

    if iterative:
        t0 = time.perf_counter()
        outcome = run_bsp(graph, solution, program, query, mode, batch_size, workers, bitmap,
                          max_supersteps)
        run_secs = time.perf_counter() - t0
        shuffle = outcome.build_secs
        part_busy = run_secs - shuffle
        phases = {"load": load_secs, "gep": gep_secs, "shuffle": shuffle, "execute": part_busy}
        per_bin_runtime = []
        peak_mem = max((b.used for b in solution.bins), default=0)
        supersteps = outcome.metrics
    else:
        outcome = execute(graph, solution, program, mode, batch_size, workers, bitmap, query)
        parts = outcome.stats.partitions
        shuffle = sum(p["build_secs"] for p in parts)
        part_busy = sum(p["run_secs"] for p in parts)
        phases = {"load": load_secs, "gep": gep_secs, "shuffle": shuffle, "execute": part_busy}
        per_bin_runtime = [p["run_secs"] for p in parts]
        peak_mem = max((p["resident_bytes"] + p["bitmap_bytes"] for p in parts), default=0)
        supersteps = []
    elapsed = time.perf_counter() - t_start
    report = RunReport(
        ce_node_secs=load_secs + gep_secs + shuffle + part_busy,
        peak_memory_bytes=peak_mem,
        peak_rss_bytes=peak_rss_bytes(),
        elapsed_secs=elapsed,
        phases=phases,
        bins=solution.num_bins,
        subgraphs=len(solution.subgraphs),
        subgraphs_per_bin=[len(b.subgraphs) for b in solution.bins],
        runtime_per_bin=per_bin_runtime,
        supersteps=supersteps,
    )
    return report, outcome


COMPARE_FIELDS = ("heuristic", "seed", "bins", "pack_secs", "pack_peak_bytes", "ce_node_secs",
                  "elapsed_secs", "status")


def compare_packing(graph, query, heuristics, seeds, bin_capacity, max_subgraphs=3000, program=None,
                    track_memory=True, subgraphs=None, **exec_opts) -> dict:
    """One row per (heuristic, seed) with bins, packing time and memory; medians per heuristic.

    When ``program`` is given each packing is also executed and its effort and
    elapsed time recorded. Exact packing on an instance too large for it is
    reported with status ``skipped``.
    """
    heuristics = list(heuristics)
    if len(heuristics) < 2:
        raise ConfigError("compare at least two heuristics")
    sgs = subgraphs if subgraphs is not None else extract_subgraphs(graph, query, bin_capacity)
    rows = []
    for h in heuristics:
        for seed in seeds:
            cfg = PackingConfig(bin_capacity, max_subgraphs, h, seed=seed)
            row = dict.fromkeys(COMPARE_FIELDS)
            row.update(heuristic=h, seed=seed, status="ok")
            try:
                t0 = time.perf_counter()
                sol = pack(sgs, cfg, graph)
                row["pack_secs"] = time.perf_counter() - t0
            except InstanceTooLargeError:
                row["status"] = "skipped"
                rows.append(row)
                continue
            row["bins"] = sol.num_bins
            if track_memory:
                tracemalloc.start()
                pack(sgs, cfg, graph)
                row["pack_peak_bytes"] = tracemalloc.get_traced_memory()[1]
                tracemalloc.stop()
            if program is not None:
                from .engine import execute

                t0 = time.perf_counter()
                out = execute(graph, sol, program, query=query, **exec_opts)
                row["elapsed_secs"] = time.perf_counter() - t0
                row["ce_node_secs"] = sum(p["build_secs"] + p["run_secs"] for p in out.stats.partitions)
            rows.append(row)
    medians = {}
    for h in heuristics:
        ok = [r for r in rows if r["heuristic"] == h and r["status"] == "ok"]
        medians[h] = {
            k: (statistics.median(r[k] for r in ok) if ok and ok[0][k] is not None else None)
            for k in ("bins", "pack_secs", "pack_peak_bytes", "ce_node_secs", "elapsed_secs")
        }
    return {"rows": rows, "medians": medians, "subgraphs": len(sgs)}


def comparison_tsv(table) -> str:
    lines = ["\t".join(COMPARE_FIELDS)]
    for r in table["rows"]:
        lines.append("\t".join("" if r[k] is None else str(r[k]) for k in COMPARE_FIELDS))
    return "\n".join(lines) + "\n"
