import itertools

import networkx as nx
import pytest
from hypothesis import given, strategies as st

import oracles
from gdfractal.digraph import (
    Digraph,
    all_circuits_through,
    circuit_avoiding,
    circuit_vertices,
    paths_from,
    reachable,
    return_circuits,
    simple_circuits,
    strongly_connected,
    validate_graph,
)

EX47 = Digraph(["1", "2"], [("1", "1"), ("1", "2"), ("2", "1"), ("2", "2")])
EX43 = Digraph(["1", "2", "3"], [("1", "1"), ("1", "2"), ("2", "1"), ("2", "2"), ("3", "3"), ("3", "1"), ("3", "3")])
FIG2 = Digraph(["1", "2", "3"], [("1", "1"), ("1", "2"), ("1", "3"), ("2", "1"), ("2", "3"), ("3", "3", "e"), ("3", "3", "e'")])
CANTOR = Digraph(["1"], [("1", "1"), ("1", "1")])


def test_validate_graph():
    assert validate_graph(CANTOR) == [] and validate_graph(EX47) == []
    (v,) = validate_graph(Digraph(["1"], [("1", "1")]))
    assert (v.vertex, v.degree) == ("1", 1) and "d_u >= 2" in str(v)


def test_default_labels_and_positions():
    assert EX43.labels((5,)) == ["e3(2)"]
    assert EX43.position(6) == 3
    assert FIG2.labels((5, 6)) == ["e", "e'"]


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        Digraph(["1", "1"], [])
    with pytest.raises(ValueError):
        Digraph(["1"], [("1", "2")])


def test_strong_connectivity():
    assert strongly_connected(EX47)
    assert not strongly_connected(EX43)
    assert strongly_connected(Digraph(["1"], [("1", "1")]))


def test_reachable():
    assert EX43.labels(reachable(EX43, "3", "1")) == ["e3(2)"]
    assert reachable(FIG2, "3", "1") is None
    assert reachable(EX47, "1", "1") == ()


def test_circuit_avoiding():
    assert EX47.labels(circuit_avoiding(EX47, "1")) == ["e2(2)"]
    assert FIG2.labels(circuit_avoiding(FIG2, "3")) == ["e1(1)"]
    two_cycle = Digraph(["1", "2"], [("1", "2"), ("1", "2"), ("2", "1"), ("2", "1")])
    assert circuit_avoiding(two_cycle, "1") is None


def test_return_circuits():
    assert [FIG2.labels(c) for c in return_circuits(FIG2, "3")] == [["e"], ["e'"]]
    assert [EX47.labels(c) for c in return_circuits(EX47, "1")] == [["e1(1)"], ["e1(2)", "e2(1)"]]
    dag = Digraph(["1", "2"], [("1", "2"), ("1", "2"), ("2", "2"), ("2", "2")])
    assert return_circuits(dag, "1") == []


def test_paths_from_counts():
    assert len(list(paths_from(CANTOR, "1", 2))) == 6
    assert [EX47.labels(p) for p in paths_from(EX47, "1", 1)] == [["e1(1)"], ["e1(2)"]]
    assert len(list(paths_from(EX43, "3", 1))) == 3
    with pytest.raises(ValueError):
        list(paths_from(CANTOR, "1", 0))


def test_all_circuits_through():
    assert all_circuits_through(FIG2, "3")
    assert not all_circuits_through(EX47, "1")
    assert all_circuits_through(CANTOR, "1")


@st.composite
def graphs(draw, max_v=5):
    n = draw(st.integers(1, max_v))
    vs = [str(i) for i in range(1, n + 1)]
    edges = []
    for v in vs:
        for _ in range(draw(st.integers(1, 3))):
            edges.append((v, draw(st.sampled_from(vs))))
    return Digraph(vs, edges), vs, [(a, b) for a, b in edges]


@given(graphs())
def test_strongly_connected_matches_networkx(data):
    g, vs, edges = data
    assert strongly_connected(g) == nx.is_strongly_connected(oracles.graph(vs, edges))


@given(graphs())
def test_circuit_avoiding_matches_acyclicity(data):
    g, vs, edges = data
    for u in vs:
        c = circuit_avoiding(g, u, within=g.reachable_set(u))
        assert (c is None) == (not oracles.has_cycle_avoiding(vs, edges, u))
        if c is not None:
            assert g.is_chain(c) and g.edges[c[0]].src == g.edges[c[-1]].dst
            assert u not in circuit_vertices(g, c)


@given(graphs())
def test_return_circuits_shape(data):
    g, vs, _ = data
    for u in vs:
        for c in return_circuits(g, u):
            assert g.is_chain(c) and g.edges[c[0]].src == u and g.edges[c[-1]].dst == u
            mids = circuit_vertices(g, c)[1:]
            assert len(set(mids)) == len(mids) and u not in mids
            assert len(c) <= len(vs)


@given(graphs(max_v=4))
def test_simple_circuits_match_networkx(data):
    g, vs, edges = data
    ours = simple_circuits(g)
    assert len(ours) == len(set(ours)) == oracles.simple_cycle_count(vs, edges)
    for c in ours:
        assert g.is_chain(c) and g.edges[c[0]].src == g.edges[c[-1]].dst
        verts = circuit_vertices(g, c)
        assert len(set(verts)) == len(verts)


@given(graphs(max_v=4), st.integers(1, 3))
def test_paths_from_enumerates_all_chains(data, m):
    g, vs, _ = data
    u = vs[0]
    got = list(paths_from(g, u, m))
    assert all(g.is_chain(p) and g.edges[p[0]].src == u for p in got)
    lengths = [len(p) for p in got]
    assert lengths == sorted(lengths)
    for k in range(1, m + 1):
        brute = [p for p in itertools.product(range(len(g.edges)), repeat=k)
                 if g.edges[p[0]].src == u and g.is_chain(p)]
        assert sorted(p for p in got if len(p) == k) == sorted(brute)


@given(graphs())
def test_reachable_is_shortest(data):
    g, vs, edges = data
    h = oracles.graph(vs, edges)
    for u, v in itertools.product(vs, vs):
        p = reachable(g, u, v)
        if u == v:
            assert p == ()
        elif p is None:
            assert not nx.has_path(h, u, v)
        else:
            assert g.is_chain(p) and len(p) == nx.shortest_path_length(h, u, v)
