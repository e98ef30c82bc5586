import json
import statistics

import pytest

from subscale.apps import ConnectedComponents, lcc
from subscale.errors import ConfigError
from subscale.extraction import ExtractionQuery, extract_subgraphs
from subscale.generators import barabasi_albert
from subscale.metrics import COMPARE_FIELDS, RunReport, compare_packing, comparison_tsv, measure_run
from subscale.packing import PackingConfig


@pytest.fixture(scope="module")
def graph():
    return barabasi_albert(200, 2, seed=3)


def capacity(graph, factor=5):
    return max(s.size for s in extract_subgraphs(graph, ExtractionQuery())) * factor


def test_measure_run_reports_phases_and_effort(graph):
    cfg = PackingConfig(capacity(graph), 30)
    report, outcome = measure_run(graph, ExtractionQuery(), cfg, lcc, batch_size=8, load_secs=0.25)
    assert set(report.phases) == {"load", "gep", "shuffle", "execute"}
    assert report.phases["load"] == 0.25
    assert report.ce_node_secs == pytest.approx(sum(report.phases.values()))
    assert report.elapsed_secs >= report.phases["load"]
    assert report.bins == len(report.subgraphs_per_bin) == len(report.runtime_per_bin)
    assert sum(report.subgraphs_per_bin) == report.subgraphs == 200
    assert 0 < report.peak_memory_bytes and report.peak_rss_bytes > 0
    assert len(outcome.results) == 200
    d = json.loads(report.to_json())
    assert d["bin_stats"]["subgraphs"]["count"] == report.bins


def test_measure_run_iterative_and_gep_only(graph):
    cfg = PackingConfig(capacity(graph), 30)
    report, res = measure_run(graph, ExtractionQuery(), cfg, ConnectedComponents(), iterative=True,
                              gep_mode="distributed")
    assert res.converged and len(report.supersteps) == res.supersteps
    report, sol = measure_run(graph, ExtractionQuery(), cfg)
    assert report.phases["execute"] == 0.0 and report.bins == sol.num_bins
    with pytest.raises(ConfigError):
        measure_run(graph, ExtractionQuery(), cfg, gep_mode="cloud")


def test_bin_stats_of_empty_report():
    r = RunReport(0.0, 0, 0, 0.0, {}, 0, 0)
    assert r.bin_stats()["runtime_secs"] == {"count": 0, "min": None, "median": None, "max": None}


def test_compare_packing_table(graph):
    table = compare_packing(graph, ExtractionQuery(), ["firstfit", "shingle", "exact"], [0, 1],
                            capacity(graph), 30, program=lcc, batch_size=16)
    rows = table["rows"]
    assert len(rows) == 6
    assert {r["status"] for r in rows if r["heuristic"] == "exact"} == {"skipped"}
    ok = [r for r in rows if r["status"] == "ok"]
    assert all(r["bins"] >= 1 and r["pack_peak_bytes"] > 0 and r["elapsed_secs"] > 0 for r in ok)
    assert table["medians"]["exact"]["bins"] is None
    assert table["medians"]["shingle"]["bins"] == statistics.median(
        r["bins"] for r in ok if r["heuristic"] == "shingle")
    lines = comparison_tsv(table).splitlines()
    assert lines[0].split("\t") == list(COMPARE_FIELDS) and len(lines) == 7
    with pytest.raises(ConfigError):
        compare_packing(graph, ExtractionQuery(), ["shingle"], [0], 100)


def test_single_partition_effort_tracks_elapsed(graph):
    cfg = PackingConfig(10 ** 9, 10 ** 6)
    report, _ = measure_run(graph, ExtractionQuery(), cfg, lcc, batch_size=64)
    assert report.bins == 1
    assert report.ce_node_secs == pytest.approx(report.elapsed_secs, rel=0.25)


def test_bin_distributions_match_the_solution(graph):
    cfg = PackingConfig(capacity(graph), 17)
    report, sol = measure_run(graph, ExtractionQuery(), cfg)
    per_bin = sorted(len(b.subgraphs) for b in sol.bins)
    stats = report.bin_stats()["subgraphs"]
    assert (stats["min"], stats["max"], stats["count"]) == (per_bin[0], per_bin[-1], len(per_bin))
    assert stats["median"] == statistics.median(per_bin)


def test_comparison_is_reproducible(graph):
    def table():
        t = compare_packing(graph, ExtractionQuery(), ["ffd", "kmeans", "agglomerative"], [0, 3],
                            capacity(graph), 25, track_memory=False)
        return [(r["heuristic"], r["seed"], r["bins"]) for r in t["rows"]]

    assert table() == table()


def test_exact_row_is_minimal_on_a_small_fixture():
    from subscale.generators import path_graph

    g = path_graph(10)
    sgs = extract_subgraphs(g, ExtractionQuery())
    t = compare_packing(g, ExtractionQuery(), ["firstfit", "ffd", "shingle", "kmeans", "exact"], [0, 1],
                        16 * 9, 4, subgraphs=sgs, track_memory=False)
    best = min(r["bins"] for r in t["rows"])
    assert all(r["bins"] == best for r in t["rows"] if r["heuristic"] == "exact")
