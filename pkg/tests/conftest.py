"""Shared fixtures and the acceptance-summary hook."""

from __future__ import annotations

import numpy as np
import pytest

from gsobolev import Graph

# (criterion number, description, passed) collected by the acceptance tests.
_ACCEPTANCE: list[tuple[int, str, bool]] = []


@pytest.fixture
def acceptance():
    """Recorder: acceptance tests report one pass/fail line per criterion."""

    def record(num: int, desc: str, ok: bool) -> None:
        _ACCEPTANCE.append((num, desc, ok))
        print(f"ACCEPTANCE {num} {'PASS' if ok else 'FAIL'}: {desc}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, desc, ok in sorted(_ACCEPTANCE):
        terminalreporter.write_line(
            f"ACCEPTANCE {num} {'PASS' if ok else 'FAIL'}: {desc}"
        )


@pytest.fixture
def path_graph() -> Graph:
    """Unit path 0 - 1 - 2 (root 0, a = 1, b = 2 in the examples)."""
    return Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def square_cycle() -> Graph:
    """Unit 4-cycle; from root 0 node 2 has two equal-length root paths."""
    return Graph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])


@pytest.fixture
def triangle() -> Graph:
    """Unit triangle; the far edge splits at its midpoint from root 0."""
    return Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


FIGURE_EDGES = [
    (0, 1), (0, 2), (0, 5), (4, 3), (1, 4),
    (0, 6), (0, 7), (0, 8), (2, 6), (4, 9),
    (2, 7), (2, 8), (5, 6), (5, 7), (6, 8),
]


@pytest.fixture
def figure_graph() -> Graph:
    """Ten nodes, fifteen unit edges, laid out so that from root node 0 the
    region reached through edge (1, 4) is exactly nodes {3, 4, 9} with the
    two unit edges (4, 3) and (4, 9); edge ids follow the list order."""
    return Graph.from_edges(10, [(u, v, 1.0) for u, v in FIGURE_EDGES])


def random_weighted_graph(seed: int, n_lo: int = 8, n_hi: int = 40) -> Graph:
    """Connected random graph with generic (tie-free) real weights."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    edges = [(int(rng.integers(0, i)), i, float(rng.uniform(0.2, 2.0))) for i in range(1, n)]
    have = {(min(u, v), max(u, v)) for u, v, _ in edges}
    extras = int(rng.integers(0, n))
    for _ in range(extras):
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u == v or (min(u, v), max(u, v)) in have:
            continue
        have.add((min(u, v), max(u, v)))
        edges.append((u, v, float(rng.uniform(0.2, 2.0))))
    return Graph.from_edges(n, edges)
