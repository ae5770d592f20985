import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from networkx.algorithms.isomorphism import DiGraphMatcher

from gxg.errors import DuplicatePort, SizeLimitExceeded, UnknownNode, UnknownNodeInEdge, UnlabeledNode
from gxg.graph import (
    EMPTY,
    UNLABELED,
    Graph,
    IsoSet,
    find_isomorphism,
    iso_equal,
    new_graph,
    node_profile,
    ported_isomorphic,
    reach,
    reachable,
)

from .helpers import fig8_graph, graph
from .strategies import graphs, relabelled


def test_empty_graph():
    G = new_graph([], {}, [], [])
    assert G == EMPTY
    assert G.type == 0 and G.is_empty()


def test_single_node_type_one():
    G = new_graph(["n1"], {"n1": "boy"}, [], ["n1"])
    assert G.type == 1
    assert G.label("n1") == "boy"


def test_duplicate_port_rejected():
    with pytest.raises(DuplicatePort, match="n1"):
        new_graph(["n1"], {"n1": "boy"}, [], ["n1", "n1"])


def test_edge_to_unknown_node_rejected():
    with pytest.raises(UnknownNodeInEdge, match="n9"):
        new_graph(["n1"], {"n1": "boy"}, [("n1", "arg0", "n9")], [])


def test_missing_label_rejected():
    with pytest.raises(UnlabeledNode, match="n2"):
        new_graph(["n1", "n2"], {"n1": "boy"}, [], [])


def test_reserved_label_only_for_exempt_nodes():
    with pytest.raises(UnlabeledNode):
        new_graph(["n1"], {"n1": UNLABELED}, [], [])
    G = new_graph(["n1"], {}, [], [], unlabeled=["n1"])
    assert G.label("n1") == UNLABELED


def test_port_must_be_node():
    with pytest.raises(UnknownNode):
        new_graph(["n1"], {"n1": "a"}, [], ["zz"])


def test_parallel_edges_collapse():
    G = new_graph(["a", "b"], {"a": "x", "b": "y"}, [("a", "e", "b"), ("a", "e", "b")], [])
    assert len(G.edges) == 1


def test_reach_of_empty_sequence_is_empty():
    G = graph({"a": "x", "b": "x"}, ["a-e->b"], ["a"])
    assert reach(G, ()) == EMPTY


def test_reach_chain_with_isolated_node():
    G = graph({"a": "x", "b": "x", "c": "x", "d": "x"}, ["a-e->b", "b-e->c"], ["a"])
    R = reach(G, ("b",))
    assert set(R.nodes) == {"b", "c"}
    assert R.ports == ("b",)
    assert set(R.edges) == {("b", "e", "c")}


def test_reach_unknown_node():
    with pytest.raises(UnknownNode):
        reach(graph({"a": "x"}), ("q",))


@given(graphs(), st.data())
@settings(max_examples=150, deadline=None)
def test_reach_idempotent_and_matches_bfs(G, data):
    ids = list(G.nodes)
    p = tuple(data.draw(st.permutations(ids))[: data.draw(st.integers(0, len(ids)))]) if ids else ()
    R = reach(G, p)
    assert reach(R, p) == R
    dg = nx.DiGraph()
    dg.add_nodes_from(ids)
    dg.add_edges_from((s, t) for s, _, t in G.edges)
    expected = set(p).union(*(nx.descendants(dg, v) for v in p)) if p else set()
    assert set(R.nodes) == expected
    assert reachable(G, p) == expected


def test_profile_without_incoming_edges_is_empty():
    G = graph({"a": "x", "b": "y"}, [], ["a"])
    assert node_profile(G, ("a",), "b") == frozenset()


def test_profiles_of_figure_eight_argument():
    G = fig8_graph(brown_reachable=False)
    p = G.ports
    assert node_profile(G, p, "v3") == {(2, "beta", "b")}
    assert node_profile(G, p, "d1") == {(1, "beta", "c"), (2, "alpha", "c")}
    assert node_profile(G, p, "d3") == {(2, "alpha", "c")}


@given(graphs())
@settings(max_examples=100, deadline=None)
def test_profile_triples_share_node_label(G):
    for v in G.nodes:
        assert {lab for _, _, lab in node_profile(G, G.ports, v)} <= {G.label(v)}


def test_profile_position_restriction():
    G = fig8_graph(brown_reachable=False)
    assert node_profile(G, G.ports, "d1", positions=[2]) == {(2, "alpha", "c")}


def test_iso_trivial_cases():
    assert ported_isomorphic(EMPTY, EMPTY)
    g1 = new_graph(["n1"], {"n1": "boy"}, [], ["n1"])
    g2 = new_graph(["m"], {"m": "boy"}, [], ["m"])
    assert ported_isomorphic(g1, g2)
    assert not ported_isomorphic(g1, new_graph(["m"], {"m": "boy"}, [], []))


def test_iso_respects_port_order():
    G = graph({"a": "x", "b": "x"}, ["a-e->b"], ["a", "b"])
    H = graph({"a": "x", "b": "x"}, ["a-e->b"], ["b", "a"])
    assert not ported_isomorphic(G, H)
    assert ported_isomorphic(G, G.rename({"a": "b", "b": "a"}))


def test_iso_size_limit(monkeypatch):
    big = Graph({f"n{i}": "a" for i in range(5)}, [], [])
    with pytest.raises(SizeLimitExceeded):
        ported_isomorphic(big, big, limit=4)
    monkeypatch.setenv("GXG_MAX_ISO_NODES", "3")
    with pytest.raises(SizeLimitExceeded):
        ported_isomorphic(big, big)


def _nx_ported_iso(G1: Graph, G2: Graph) -> bool:
    def to_nx(G):
        pos = {v: i for i, v in enumerate(G.ports, 1)}
        d = nx.MultiDiGraph()
        for v in G.nodes:
            d.add_node(v, key=(G.label(v), pos.get(v, 0)))
        for s, l, t in G.edges:
            d.add_edge(s, t, label=l)
        return d

    if G1.type != G2.type or len(G1) != len(G2) or len(G1.edges) != len(G2.edges):
        return False
    m = DiGraphMatcher(
        to_nx(G1), to_nx(G2),
        node_match=lambda a, b: a["key"] == b["key"],
        edge_match=lambda a, b: sorted(x["label"] for x in a.values()) == sorted(x["label"] for x in b.values()),
    )
    return m.is_isomorphic()


@given(graphs(), st.data())
@settings(max_examples=200, deadline=None)
def test_iso_agrees_with_networkx(G, data):
    H = data.draw(relabelled(G))
    assert ported_isomorphic(G, H)
    other = data.draw(graphs(max_nodes=len(G) + 1))
    assert ported_isomorphic(G, other) == _nx_ported_iso(G, other)


@given(graphs(), st.data())
@settings(max_examples=80, deadline=None)
def test_found_isomorphism_is_valid(G, data):
    H = data.draw(relabelled(G))
    mu = find_isomorphism(G, H)
    assert mu is not None
    assert G.rename(mu) == H


@given(st.lists(graphs(max_nodes=4), min_size=3, max_size=6))
@settings(max_examples=40, deadline=None)
def test_iso_is_equivalence(gs):
    for a in gs:
        assert ported_isomorphic(a, a)
    for a, b in itertools.permutations(gs, 2):
        assert ported_isomorphic(a, b) == ported_isomorphic(b, a)
    for a, b, c in itertools.permutations(gs, 3):
        if ported_isomorphic(a, b) and ported_isomorphic(b, c):
            assert ported_isomorphic(a, c)


def test_isoset_dedupes():
    g1 = graph({"a": "x", "b": "y"}, ["a-e->b"], ["a"])
    g2 = g1.rename({"a": "p", "b": "q"})
    s = IsoSet([g1, g2])
    assert len(s) == 1 and g2 in s
    assert iso_equal([g1], [g2])
    assert not iso_equal([g1], [g1, EMPTY])
