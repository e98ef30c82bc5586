import json

import pytest

from subscale.cli import main, parse_capacity
from subscale.errors import ConfigError
from subscale.generators import barabasi_albert
from subscale.graph import write_edge_list

from oracles import adjacency_sets, brute_lcc, union_find_labels


@pytest.fixture
def files(tmp_path):
    g = barabasi_albert(60, 2, seed=1)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    return g, tmp_path, str(path)


def test_parse_capacity():
    assert parse_capacity("65536") == 65536
    assert parse_capacity("64K") == 64 * 1024
    assert parse_capacity("8G") == 8 * 1024 ** 3
    assert parse_capacity("2mb") == 2 * 1024 ** 2
    for bad in ("", "abc", "-1", "0", "5Q"):
        with pytest.raises(ConfigError):
            parse_capacity(bad)


def test_gep_then_run(files, capsys):
    g, tmp, graph = files
    plan = tmp / "plan.json"
    vmap = tmp / "map.tsv"
    assert main(["gep", "--graph", graph, "--bc", "2K", "--max", "10", "--out", str(plan),
                 "--vertex-map", str(vmap)]) == 0
    d = json.loads(plan.read_text())
    assert d["query"]["k"] == 1 and len(d["subgraphs"]) == 60
    assert all(b["used_capacity"] <= 2048 and len(b["subgraphs"]) <= 10 for b in d["bins"])
    assert vmap.read_text().count("owned") == 60

    assert main(["run", "--graph", graph, "--partitions", str(plan), "--app", "lcc"]) == 0
    out = capsys.readouterr().out.splitlines()
    adj = adjacency_sets(g)
    got = {int(k): float(v) for k, v in (line.split("\t") for line in out)}
    assert got == {v: brute_lcc(adj, v) for v in adj}


def test_iterative_components_with_metrics(files):
    g, tmp, graph = files
    plan = tmp / "plan.json"
    assert main(["gep", "--graph", graph, "--bc", "2K", "--mode", "distributed", "--out", str(plan)]) == 0
    out, metrics = tmp / "cc.json", tmp / "steps.jsonl"
    assert main(["run", "--graph", graph, "--partitions", str(plan), "--app", "cc", "--iterative",
                 "--format", "json", "--out", str(out), "--metrics-out", str(metrics)]) == 0
    labels = {int(k): v for k, v in json.loads(out.read_text()).items()}
    assert labels == union_find_labels(g.vertices(), [(u, v) for u, v, _ in g.edges()])
    rows = [json.loads(line) for line in metrics.read_text().splitlines()]
    assert rows[-1]["changed"] == 0 and rows[0]["superstep"] == 1


def test_bench_and_compare(files, capsys):
    _, tmp, graph = files
    assert main(["bench", "--graph", graph, "--bc", "4K", "--app", "tc", "--batch-size", "8"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["subgraphs"] == 60 and "ce_node_secs" in report
    assert main(["compare-packing", "--graph", graph, "--bc", "4K", "--heuristics",
                 "firstfit,shingle", "--seeds", "0,1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 5 and lines[0].startswith("heuristic\tseed\tbins")


def test_exit_codes(files, capsys):
    _, tmp, graph = files
    plan = tmp / "plan.json"
    assert main(["gep", "--graph", graph, "--bc", "20", "--out", str(plan)]) == 3
    assert main(["gep", "--graph", str(tmp / "missing.txt"), "--out", str(plan)]) == 2
    main(["gep", "--graph", graph, "--out", str(plan)])
    assert main(["run", "--graph", graph, "--partitions", str(plan), "--app", "ffl"]) == 2
    assert main(["run", "--graph", graph, "--partitions", str(plan), "--app", "cc"]) == 2
    assert main(["compare-packing", "--graph", graph, "--heuristics", "shingle,magic"]) == 2
    bad_query = tmp / "q.json"
    bad_query.write_text('{"radius": 3}')
    assert main(["gep", "--graph", graph, "--query", str(bad_query), "--out", str(plan)]) == 2
    assert "config error" in capsys.readouterr().err


def test_ppr_topk(files, capsys):
    g, tmp, graph = files
    plan = tmp / "plan.json"
    q = tmp / "q.json"
    q.write_text(json.dumps({"k": 2}))
    main(["gep", "--graph", graph, "--query", str(q), "--out", str(plan)])
    assert main(["run", "--graph", graph, "--partitions", str(plan), "--app", "ppr", "--steps", "3000",
                 "--topk", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 60
    qv, links = lines[0].split("\t")
    assert len(links.split()) <= 3
