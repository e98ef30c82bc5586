"""Command line: ``subscale gep | run | bench | compare-packing``.

Exit codes: 0 success, 2 configuration error, 3 capacity error, 4 contract violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import apps
from .errors import CapacityError, ConfigError, ContractViolation, SubscaleError
from .extraction import ExtractionQuery, extract_subgraphs
from .gep import gep
from .graph import attach_attributes, load_graph
from .packing import HEURISTICS, PackingConfig, PackingSolution, pack

log = logging.getLogger("subscale")

_SUFFIX = {"": 1, "K": 1 << 10, "M": 1 << 20, "G": 1 << 30, "T": 1 << 40}


def parse_capacity(text: str) -> int:
    """``4096``, ``64K``, ``8G`` (binary multiples; a trailing ``B`` is allowed)."""
    t = text.strip().upper().removesuffix("B")
    unit = t[-1:] if t[-1:].isalpha() else ""
    num = t[: len(t) - len(unit)]
    if unit not in _SUFFIX:
        raise ConfigError(f"bad capacity suffix in {text!r}")
    try:
        value = float(num) * _SUFFIX[unit]
    except ValueError:
        raise ConfigError(f"bad capacity {text!r}") from None
    if value <= 0:
        raise ConfigError("capacity must be positive")
    return int(value)


def _csv(text, cast=str):
    return [cast(x) for x in text.split(",") if x.strip()]


def _add_graph_args(p):
    p.add_argument("--graph", required=True, help="edge list (src dst [weight]) or adjacency list")
    p.add_argument("--graph-format", choices=("edges", "adjacency"), default="edges")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--vertex-attrs", help="TSV of id<TAB>key=value ... rows")
    p.add_argument("--edge-attrs", help="TSV of src,dst<TAB>key=value ... rows")
    p.add_argument("--seed", type=int, default=0)


def _add_pack_args(p):
    p.add_argument("--query", help="extraction query JSON (default: every vertex, k=1)")
    p.add_argument("--bc", default="1G", help="bin capacity, e.g. 65536, 64K, 8G")
    p.add_argument("--max", type=int, default=3000, dest="max_subgraphs", help="max subgraphs per bin")


def _add_exec_args(p):
    p.add_argument("--app", choices=("lcc", "tc", "wt", "ffl", "ppr", "cc"), default="lcc")
    p.add_argument("--mode", choices=("serial", "vector", "batched"), default="batched")
    p.add_argument("--batch-size", type=int, default=3000)
    p.add_argument("--bitmap", choices=("growable", "word", "sparse"), default="word")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--iterative", action="store_true", help="run the app as BSP supersteps")
    p.add_argument("--max-supersteps", type=int, default=1000)
    p.add_argument("--walks", type=int, help="PPR: number of walks (default: step budget)")
    p.add_argument("--steps", type=int, default=100_000, help="PPR: total walk steps")
    p.add_argument("--alpha", type=float, default=0.15, help="PPR: restart probability")
    p.add_argument("--topk", type=int, help="PPR: report the top-k predicted links instead")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subscale", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gep", help="extract and pack subgraphs into a partition plan")
    _add_graph_args(p)
    _add_pack_args(p)
    p.add_argument("--heuristic", choices=HEURISTICS, default="shingle")
    p.add_argument("--mode", choices=("centralized", "distributed"), default="centralized")
    p.add_argument("--shards", type=int, default=4)
    p.add_argument("--out", required=True, help="plan JSON path")
    p.add_argument("--vertex-map", help="also write vertex<TAB>bin<TAB>owned|ghost rows here")

    p = sub.add_parser("run", help="execute an app over a partition plan")
    _add_graph_args(p)
    _add_exec_args(p)
    p.add_argument("--partitions", required=True, help="plan JSON written by 'gep'")
    p.add_argument("--out", help="results path (default stdout)")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--metrics-out", help="per-superstep metrics (JSON rows) for iterative runs")

    p = sub.add_parser("bench", help="end-to-end timed run with an effort/memory report")
    _add_graph_args(p)
    _add_pack_args(p)
    _add_exec_args(p)
    p.add_argument("--heuristic", choices=HEURISTICS, default="shingle")
    p.add_argument("--gep-mode", choices=("centralized", "distributed"), default="centralized")
    p.add_argument("--shards", type=int, default=4)
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--format", choices=("tsv", "json"), default="json")

    p = sub.add_parser("compare-packing", help="bins/time/memory per heuristic and seed")
    _add_graph_args(p)
    _add_pack_args(p)
    p.add_argument("--heuristics", default="firstfit,ffd,shingle,kmeans")
    p.add_argument("--seeds", default="0")
    p.add_argument("--execute", action="store_true", help="also run LCC on each packing")
    p.add_argument("--out", help="table path (default stdout)")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    return ap


def _load(args):
    t0 = time.perf_counter()
    g = load_graph(args.graph, args.graph_format, args.directed)
    if args.vertex_attrs:
        g = attach_attributes(g, args.vertex_attrs, "vertex")
    if args.edge_attrs:
        g = attach_attributes(g, args.edge_attrs, "edge")
    return g, time.perf_counter() - t0


def _query(path) -> ExtractionQuery:
    if not path:
        return ExtractionQuery()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read query: {exc}") from exc
    return ExtractionQuery.from_json(text)


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _program(args, graph):
    if args.app == "cc":
        if not args.iterative:
            raise ConfigError("--app cc needs --iterative")
        return apps.ConnectedComponents()
    if args.iterative:
        raise ConfigError(f"--app {args.app} is a single-pass program; drop --iterative")
    if args.app == "ffl" and not graph.directed:
        raise ConfigError("--app ffl needs a directed graph (--directed)")
    if args.app == "ppr":
        if args.topk:
            def predict(view):
                return apps.link_prediction(view, args.topk, args.steps, args.alpha, args.seed, args.walks)

            return predict
        return apps.make_ppr(args.steps, args.alpha, args.seed, args.walks)
    return {"lcc": apps.lcc, "tc": apps.triangle_count, "wt": apps.weak_ties, "ffl": apps.motif_ffl}[args.app]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return " ".join(f"{k}:{_fmt(v)}" for k, v in value.items())
    if isinstance(value, list):
        return " ".join(f"{k}:{_fmt(v)}" for k, v in value)
    return str(value)


def results_tsv(results: dict) -> str:
    return "".join(f"{k}\t{_fmt(results[k])}\n" for k in sorted(results, key=lambda x: (str(type(x)), x)))


def cmd_gep(args):
    graph, _ = _load(args)
    query = _query(args.query)
    cfg = PackingConfig(parse_capacity(args.bc), args.max_subgraphs, args.heuristic, seed=args.seed)
    if args.mode == "distributed":
        sol = gep(graph, query, cfg, shards=args.shards).solution
    else:
        sol = pack(extract_subgraphs(graph, query, cfg.bin_capacity), cfg, graph)
    sol.validate()
    plan = sol.to_dict()
    plan["query"] = query.to_dict()
    Path(args.out).write_text(json.dumps(plan, indent=1), encoding="utf-8")
    if args.vertex_map:
        sol.write_vertex_map(args.vertex_map)
    log.info("%d subgraphs packed into %d bins", len(sol.subgraphs), sol.num_bins)


def _read_plan(path):
    try:
        plan = json.loads(Path(path).read_text(encoding="utf-8"))
        sol = PackingSolution.from_dict(plan)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read plan {path}: {exc}") from exc
    query = ExtractionQuery.from_dict(plan["query"]) if plan.get("query") else None
    return sol, query


def cmd_run(args):
    from .bsp import run_bsp
    from .engine import execute

    graph, _ = _load(args)
    sol, query = _read_plan(args.partitions)
    program = _program(args, graph)
    if args.iterative:
        res = run_bsp(graph, sol, program, query, args.mode, args.batch_size, args.workers,
                      args.bitmap, args.max_supersteps)
        results = res.states
        if args.metrics_out:
            Path(args.metrics_out).write_text(
                "".join(json.dumps(m) + "\n" for m in res.metrics), encoding="utf-8")
        if not res.converged:
            log.warning("did not converge within %d supersteps", args.max_supersteps)
    else:
        res = execute(graph, sol, program, args.mode, args.batch_size, args.workers, args.bitmap, query)
        results = res.results
        for key, exc in sorted(res.errors.items()):
            log.error("subgraph %s failed: %s", key, exc)
    if args.format == "json":
        text = json.dumps({str(k): v for k, v in sorted(results.items())}, indent=1, default=list) + "\n"
    else:
        text = results_tsv(results)
    _emit(text, args.out)


def cmd_bench(args):
    from .metrics import measure_run

    graph, load_secs = _load(args)
    query = _query(args.query)
    cfg = PackingConfig(parse_capacity(args.bc), args.max_subgraphs, args.heuristic, seed=args.seed)
    report, _ = measure_run(
        graph, query, cfg, _program(args, graph), gep_mode=args.gep_mode, shards=args.shards,
        mode=args.mode, batch_size=args.batch_size, workers=args.workers, bitmap=args.bitmap,
        iterative=args.iterative, max_supersteps=args.max_supersteps, load_secs=load_secs,
    )
    if args.format == "json":
        text = report.to_json() + "\n"
    else:
        d = report.to_dict()
        rows = [("ce_node_secs", d["ce_node_secs"]), ("peak_memory_bytes", d["peak_memory_bytes"]),
                ("peak_rss_bytes", d["peak_rss_bytes"]), ("elapsed_secs", d["elapsed_secs"]),
                ("bins", d["bins"]), ("subgraphs", d["subgraphs"])]
        rows += [(f"phase_{k}", v) for k, v in d["phases"].items()]
        text = "".join(f"{k}\t{v}\n" for k, v in rows)
    _emit(text, args.out)


def cmd_compare(args):
    from .metrics import compare_packing, comparison_tsv

    graph, _ = _load(args)
    query = _query(args.query)
    heuristics = _csv(args.heuristics)
    for h in heuristics:
        if h not in HEURISTICS:
            raise ConfigError(f"unknown heuristic {h!r}")
    table = compare_packing(graph, query, heuristics, _csv(args.seeds, int), parse_capacity(args.bc),
                            args.max_subgraphs, program=apps.lcc if args.execute else None)
    text = json.dumps(table, indent=1) + "\n" if args.format == "json" else comparison_tsv(table)
    _emit(text, args.out)


COMMANDS = {"gep": cmd_gep, "run": cmd_run, "bench": cmd_bench, "compare-packing": cmd_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 4
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SubscaleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
