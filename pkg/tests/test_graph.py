import networkx as nx
import pytest
from hypothesis import given, settings

from conftest import load, mixed_graphs
from linsem.graph import (
    GraphError,
    MixedGraph,
    ancestral_closure,
    bidirected_components,
    induced_subgraph,
    is_ancestral,
    parse_graph,
    properties,
    remove_sinks,
    serialize,
    strongly_connected_components,
    to_dot,
)


def _digraph(G: MixedGraph) -> nx.DiGraph:
    D = nx.DiGraph()
    D.add_nodes_from(G.nodes)
    D.add_edges_from(G.directed)
    return D


def test_parse_iv_graph():
    G = load("iv")
    assert G.labels == ("1", "2", "3")
    assert G.has_directed("1", "2") and G.has_directed("2", "3")
    assert G.has_bidirected("3", "2")
    assert G.parents("3") == {1}
    assert G.siblings(2) == {1}


def test_properties_of_examples():
    p = properties(load("verma"))
    assert p.acyclic and p.simple
    assert p.sinks == {3}
    assert p.sources == {0}
    c = properties(load("cyclic"))
    assert not c.acyclic
    assert not properties(load("twoivs")).simple


@pytest.mark.parametrize(
    "text, line",
    [
        ("nodes: 1 2\n1 -> 3\n", 2),
        ("nodes: 1 2\n\n1 => 2\n", 3),
        ("# c\nnodes: 1 2\n1 -> 2\n1 -> 2\n", 4),
        ("nodes: 1 1\n", 1),
        ("1 -> 2\nnodes: 1 2\n", 1),
        ("nodes: a b\na <-> a\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphError) as info:
        parse_graph(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_nodes_line():
    with pytest.raises(GraphError):
        parse_graph("# only a comment\n")


def test_two_cycle_and_both_edge_kinds_allowed():
    G = parse_graph("nodes: x y\nx -> y\ny -> x\nx <-> y\n")
    assert not G.is_acyclic
    assert not G.is_simple


def test_unknown_node_lookup():
    G = load("iv")
    with pytest.raises(GraphError):
        G.node("7")
    with pytest.raises(GraphError):
        G.node(5)


def test_decomposition_example_components():
    G = load("decomp")
    assert sorted(map(sorted, strongly_connected_components(G))) == [[0], [1, 2], [3], [4]]
    assert sorted(map(sorted, bidirected_components(G))) == [[0, 3], [1, 4], [2]]


def test_remove_sinks_on_sink_graph():
    H = remove_sinks(load("sink5"))
    assert H.labels == ("1", "2", "3")
    assert is_ancestral(load("sink5"), ["1", "2", "3", "5"])


def test_dot_colors():
    dot = to_dot(load("iv"))
    assert '"1" -> "2" [color=blue];' in dot
    assert '"2" -> "3" [color=red, dir=both];' in dot


@settings(max_examples=60, deadline=None)
@given(mixed_graphs(max_nodes=6))
def test_serialize_round_trip(G):
    assert parse_graph(serialize(G)) == G


@settings(max_examples=60, deadline=None)
@given(mixed_graphs(max_nodes=6))
def test_scc_matches_networkx(G):
    ours = {frozenset(c) for c in strongly_connected_components(G)}
    ref = {frozenset(c) for c in nx.strongly_connected_components(_digraph(G))}
    assert ours == ref
    assert G.is_acyclic == nx.is_directed_acyclic_graph(_digraph(G))


@settings(max_examples=60, deadline=None)
@given(mixed_graphs(max_nodes=6))
def test_bidirected_components_match_networkx(G):
    U = nx.Graph()
    U.add_nodes_from(G.nodes)
    U.add_edges_from(G.bidirected)
    assert {frozenset(c) for c in bidirected_components(G)} == {frozenset(c) for c in nx.connected_components(U)}


@settings(max_examples=60, deadline=None)
@given(mixed_graphs(max_nodes=6))
def test_ancestral_closure_matches_networkx(G):
    D = _digraph(G)
    for v in G.nodes:
        assert ancestral_closure(G, [v]) == nx.ancestors(D, v) | {v}
        assert is_ancestral(G, ancestral_closure(G, [v]))


@settings(max_examples=40, deadline=None)
@given(mixed_graphs(max_nodes=6, acyclic=True))
def test_topological_order_respects_edges(G):
    order = G.topological_order
    pos = {v: k for k, v in enumerate(order)}
    assert all(pos[t] < pos[h] for t, h in G.directed)


@settings(max_examples=40, deadline=None)
@given(mixed_graphs(min_nodes=2, max_nodes=6))
def test_induced_subgraph_keeps_internal_edges(G):
    keep = [v for v in G.nodes if v % 2 == 0]
    H = induced_subgraph(G, keep)
    assert H.labels == tuple(G.labels[v] for v in keep)
    expected = {(G.labels[t], G.labels[h]) for t, h in G.directed if t in keep and h in keep}
    assert {(H.labels[t], H.labels[h]) for t, h in H.directed} == expected
