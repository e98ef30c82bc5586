import sys

import pytest

from subscale.extraction import ExtractionQuery
from subscale.graph import from_edges

# Ten people with ages, friendships weighted by interaction count.
AGES = {1: 15, 2: 30, 3: 12, 4: 17, 5: 16, 6: 40, 7: 28, 8: 10, 9: 33, 10: 18}
WEIGHTED_EDGES = [
    (1, 2, 9), (2, 3, 7), (2, 6, 2), (6, 7, 8), (6, 5, 6), (7, 9, 7),
    (7, 8, 9), (9, 10, 6), (3, 4, 8), (4, 5, 3), (8, 10, 4), (2, 9, 4),
]


def make_people_graph():
    return from_edges(
        [(u, v, {"weight": w}) for u, v, w in WEIGHTED_EDGES],
        vertices=AGES,
        vertex_attrs={v: {"age": a} for v, a in AGES.items()},
    )


@pytest.fixture
def people():
    return make_people_graph()


@pytest.fixture
def people_query():
    return ExtractionQuery("age > 18", k=1, vertex_filter="age > 25", edge_filter="weight > 5")


def make_two_bin_cc_graph():
    return from_edges([(1, 2), (1, 5), (2, 3), (5, 4), (5, 6), (3, 4)])


@pytest.fixture
def two_bin_cc_graph():
    return make_two_bin_cc_graph()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
