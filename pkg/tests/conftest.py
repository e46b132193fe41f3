from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from linsem.graph import MixedGraph, random_mixed_graph, read_graph

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load(name: str) -> MixedGraph:
    return read_graph(DATA / f"{name}.graph")


@pytest.fixture
def graph():
    return load


@st.composite
def mixed_graphs(draw, min_nodes: int = 1, max_nodes: int = 5, acyclic: bool | None = None,
                 simple: bool = False):
    """Hypothesis strategy over small mixed graphs labelled 1..n."""
    n = draw(st.integers(min_nodes, max_nodes))
    cyc = draw(st.booleans()) if acyclic is None else not acyclic
    seed = draw(st.integers(0, 2**32 - 1))
    p_dir = draw(st.sampled_from([0.2, 0.35, 0.5]))
    p_bi = draw(st.sampled_from([0.0, 0.2, 0.4]))
    return random_mixed_graph(random.Random(seed), n, p_dir, p_bi, acyclic=not cyc, simple=simple)


def pytest_terminal_summary(terminalreporter):
    """Print one line per acceptance criterion that ran."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
