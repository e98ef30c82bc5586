import math

import pytest

from subscale.apps import (
    ConnectedComponents, lcc, link_prediction, make_ppr, motif_ffl, ppr_monte_carlo, top_k_links,
    triangle_count, weak_ties,
)
from subscale.engine import execute
from subscale.extraction import ExtractionQuery, extract_subgraphs
from subscale.generators import (
    barabasi_albert, complete_graph, erdos_renyi, holme_kim, random_dag_edges, star_graph,
)
from subscale.graph import from_edges
from subscale.packing import PackingConfig, pack

from oracles import (
    adjacency_sets, brute_ffl, brute_lcc, brute_triangles, brute_weak_ties, filtered_khop, l1,
    ppr_power_iteration,
)


def run(graph, program, k=1, **opts):
    sgs = extract_subgraphs(graph, ExtractionQuery(k=k))
    sol = pack(sgs, PackingConfig(sum(s.size for s in sgs), 25, "shingle"))
    res = execute(graph, sol, program, **opts)
    assert res.errors == {}
    return res.results


def test_small_closed_forms():
    assert run(complete_graph(3), triangle_count) == {0: 1, 1: 1, 2: 1}
    assert run(complete_graph(4), triangle_count) == {v: 3 for v in range(4)}
    assert run(complete_graph(4), lcc) == {v: 1.0 for v in range(4)}
    star = star_graph(5)
    assert run(star, lcc)[0] == 0.0
    assert run(star, weak_ties)[0] == 10
    assert run(star, weak_ties)[1] == 0


@pytest.mark.parametrize("seed", range(4))
def test_counting_apps_match_brute_force(seed):
    g = holme_kim(150, 3, 0.5, seed=seed)
    adj = adjacency_sets(g)
    assert run(g, triangle_count) == {v: brute_triangles(adj, v) for v in adj}
    assert run(g, lcc) == {v: brute_lcc(adj, v) for v in adj}
    assert run(g, weak_ties) == {v: brute_weak_ties(adj, v) for v in adj}


def test_directed_lcc_counts_arcs_between_neighbors():
    g = from_edges([(1, 2), (1, 3), (2, 3), (3, 2)], directed=True)
    assert run(g, lcc)[1] == 2 / 2
    g = from_edges([(1, 2), (1, 3), (2, 3)], directed=True)
    assert run(g, lcc)[1] == 1 / 2


def test_feed_forward_loops():
    g = from_edges([(1, 2), (2, 3), (1, 3)], directed=True)
    assert run(g, motif_ffl) == {1: 1, 2: 1, 3: 1}
    cycle = from_edges([(1, 2), (2, 3), (3, 1)], directed=True)
    assert run(cycle, motif_ffl) == {1: 0, 2: 0, 3: 0}
    with pytest.raises(ValueError):
        motif_ffl(type("V", (), {"directed": False})())


@pytest.mark.parametrize("seed", range(3))
def test_ffl_matches_brute_force(seed):
    edges = random_dag_edges(40, 0.15, seed=seed)
    g = from_edges(edges, directed=True, vertices=range(40))
    arcs = {(u, v) for u, v, _ in g.edges()}
    got = run(g, motif_ffl)
    for v in g.vertices():
        nb = {u for a, b in arcs for u in (a, b) if v in (a, b)} - {v}
        assert got[v] == brute_ffl(arcs, v, nb | {v})


def subgraph_succ(graph, members):
    return {v: [w for w in graph.neighbors(v) if w in members] for v in members}


@pytest.mark.parametrize("seed", range(3))
def test_ppr_close_to_power_iteration(seed):
    g = barabasi_albert(50, 2, seed=seed)
    results = run(g, make_ppr(steps=100_000, seed=seed), k=2)
    for qv in sorted(g.vertices())[:5]:
        members = filtered_khop(g, qv, 2)
        want = ppr_power_iteration(members, subgraph_succ(g, members), qv, 0.15)
        got = results[qv]
        assert math.isclose(sum(got.values()), 1.0)
        assert set(got) <= members
        assert l1(got, want) <= 0.05


def test_ppr_is_seeded_and_walk_count_mode():
    g = erdos_renyi(40, 0.1, seed=2)
    a = run(g, make_ppr(steps=2000, seed=7))
    b = run(g, make_ppr(steps=2000, seed=7), mode="serial")
    assert a == b
    c = run(g, make_ppr(walks=50, seed=1))
    assert all(math.isclose(sum(s.values()), 1.0) for s in c.values())
    with pytest.raises(ValueError):
        ppr_monte_carlo(None, restart_prob=1.0)


def test_dead_ends_return_home():
    g = from_edges([(1, 2)], directed=True)
    scores = run(g, make_ppr(steps=20_000, seed=3))[1]
    want = ppr_power_iteration([1, 2], {1: [2], 2: []}, 1, 0.15)
    assert l1(scores, want) < 0.02


def test_link_prediction_skips_existing_links():
    assert top_k_links([2, 3], {1: 0.5, 2: 0.3, 4: 0.1, 5: 0.1, 6: 0.05}, 1, 2) == [(4, 0.1), (5, 0.1)]
    g = barabasi_albert(80, 2, seed=1)

    def program(view):
        return link_prediction(view, k=3, steps=5000)

    for qv, links in run(g, program, k=2).items():
        assert len(links) <= 3
        assert all(v != qv and v not in set(g.neighbors(qv)) for v, _ in links)


def test_components_initial_label():
    assert ConnectedComponents().initial(9) == 9


def test_more_closed_forms():
    assert run(star_graph(4), weak_ties)[0] == 6
    assert run(complete_graph(3), weak_ties) == {0: 0, 1: 0, 2: 0}
    g = erdos_renyi(100, 0.1, seed=9)
    tc = run(g, triangle_count)
    adj = adjacency_sets(g)
    total = sum(1 for u in adj for v in adj[u] for w in adj[v] if u < v < w and w in adj[u])
    assert sum(tc.values()) == 3 * total
    assert run(from_edges([], vertices=[4]), make_ppr(steps=1000)) == {4: {4: 1.0}}


def test_two_vertex_cycle_ppr():
    g = from_edges([(1, 2), (2, 1)], directed=True)
    got = run(g, make_ppr(steps=100_000, seed=5))
    want = ppr_power_iteration([1, 2], {1: [2], 2: [1]}, 1, 0.15)
    assert all(abs(got[1][v] - want[v]) <= 0.02 for v in (1, 2))
    assert run(g, make_ppr(steps=100_000, seed=5)) == got
