"""Shared fixtures and independent oracles used across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from globalness.graph import DirectedGraph, LabelTable


def random_graph(rng: np.random.Generator, n: int, m: int, prefix: str = "v") -> DirectedGraph:
    """n nodes (all present), about m random directed edges."""
    names = [f"{prefix}{i:03d}" for i in range(n)]
    edges = []
    for _ in range(m):
        u, v = rng.integers(0, n, size=2)
        edges.append((names[u], names[v]))
    return DirectedGraph.from_edges(edges, nodes=names)


def random_labels(rng: np.random.Generator, g: DirectedGraph, classes, unlabeled: float = 0.0) -> LabelTable:
    """Random classes; the first nodes take each class once so none is missing."""
    assign = {n: classes[i] for i, n in enumerate(g.ids[: len(classes)])}
    for n in g.ids[len(classes):]:
        if rng.random() >= unlabeled:
            assign[n] = classes[int(rng.integers(0, len(classes)))]
    return LabelTable.from_mapping(assign)


def floyd_warshall(g: DirectedGraph) -> np.ndarray:
    """All-pairs unit-weight distances, inf where unreachable. dist[u, v] follows u -> v."""
    n = g.node_count
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in g.edges():
        d[g.index[u], g.index[v]] = 1
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


# filled by test_acceptance.py; printed after the run so the lines survive output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
