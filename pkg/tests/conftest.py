import itertools
import sys

import numpy as np
import pytest

from commstruct.graph import Graph


def complete(n, offset=0):
    return [(offset + i, offset + j) for i, j in itertools.combinations(range(n), 2)]


def graph(n, edges):
    return Graph.from_edges(n, edges)


def triangle():
    return graph(3, [(0, 1), (1, 2), (0, 2)])


def path(n):
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves):
    return graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def K(n):
    return graph(n, complete(n))


def disjoint_cliques(*sizes):
    edges, off = [], 0
    for s in sizes:
        edges += complete(s, off)
        off += s
    return graph(off, edges)


def bridged_cliques(a, b):
    """K_a and K_b joined by one edge between node a-1 and node a."""
    return graph(a + b, complete(a) + complete(b, a) + [(a - 1, a)])


def two_triangles():
    return disjoint_cliques(3, 3)


def bridge_triangles():
    return bridged_cliques(3, 3)


def ring_of_cliques(count, size):
    edges = []
    for c in range(count):
        edges += complete(size, c * size)
        nxt = ((c + 1) % count) * size
        edges.append((c * size + size - 1, nxt))
    return graph(count * size, edges)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    return graph(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
