import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indexlab.graph import (
    CapExceeded,
    Graph,
    blow_up,
    chromatic_number,
    clique_cover,
    clique_cover_number,
    complement,
    compose,
    disjoint_union,
    independence_number,
    is_independent,
    mais,
    max_acyclic_set,
    max_independent_set,
    strong_product,
)

import reference as ref


@st.composite
def digraphs(draw, max_n=6, undirected=False):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(n) if (i < j if undirected else i != j)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen, undirected=undirected)


def edge_set(g: Graph) -> set:
    return set(g.edges())


C5 = Graph.cycle(5)


def test_constructors_and_validation():
    assert Graph.complete(3).num_edges() == 6
    assert Graph.empty(4).num_edges() == 0
    assert Graph.path(3).edges() == [(0, 1), (1, 0), (1, 2), (2, 1)]
    assert Graph.transitive_tournament(3).edges() == [(0, 1), (0, 2), (1, 2)]
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 2)])
    with pytest.raises(ValueError):
        Graph(2, (1, 0))


def test_json_roundtrip():
    g = Graph.from_edges(4, [(0, 1), (2, 3), (3, 2)])
    assert json.loads(json.dumps(g.to_json())) == {"n": 4, "edges": [[0, 1], [2, 3], [3, 2]]}
    assert Graph.from_json(json.dumps(g.to_json())) == g


def test_matrix_roundtrip():
    g = Graph.from_edges(9, [(0, 8), (8, 3), (4, 5)])
    assert Graph.from_matrix(g.adjacency_matrix()) == g


def test_complement_examples():
    assert complement(Graph.complete(5)) == Graph.empty(5)
    cc = complement(C5)
    # the complement of a 5-cycle is the cycle 0-2-4-1-3
    assert edge_set(cc) == edge_set(Graph.from_edges(5, [(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)], undirected=True))


@settings(max_examples=50, deadline=None)
@given(digraphs())
def test_complement_is_involution(g):
    assert complement(complement(g)) == g


def test_strong_product_examples():
    assert strong_product(Graph.complete(2), Graph.complete(2)) == Graph.complete(4)
    g = Graph.from_edges(3, [(0, 1), (2, 1)])
    assert strong_product(g, Graph.empty(1)) == g
    assert strong_product(Graph.empty(1), g) == g


def test_strong_product_c5_alpha_is_five():
    sq = strong_product(C5, C5)
    assert ref.alpha(25, edge_set(sq)) == 5
    assert independence_number(sq) == 5


@settings(max_examples=30, deadline=None)
@given(digraphs(max_n=4), digraphs(max_n=4))
def test_strong_product_matches_definition(g1, g2):
    e1, e2 = edge_set(g1), edge_set(g2)
    sq = strong_product(g1, g2)
    for u1, u2, v1, v2 in np.ndindex(g1.n, g2.n, g1.n, g2.n):
        if (u1, u2) == (v1, v2):
            continue
        expected = (u1 == v1 or (u1, v1) in e1) and (u2 == v2 or (u2, v2) in e2)
        assert sq.has_edge(u1 * g2.n + u2, v1 * g2.n + v2) == expected


def test_strong_product_undirected_matches_networkx():
    a = nx.cycle_graph(5)
    b = nx.path_graph(3)
    ours = strong_product(C5, Graph.path(3))
    theirs = nx.strong_product(a, b)
    expected = {(u1 * 3 + u2, v1 * 3 + v2) for (u1, u2), (v1, v2) in theirs.edges()}
    assert {tuple(sorted(e)) for e in ours.edges()} == {tuple(sorted(e)) for e in expected}


def test_blow_up_examples():
    assert blow_up(C5, 1) == C5
    assert independence_number(blow_up(C5, 2)) == 4
    k22 = blow_up(Graph.complete(2), 2)
    assert edge_set(k22) == {(a, b) for a in (0, 1) for b in (2, 3)} | {(b, a) for a in (0, 1) for b in (2, 3)}
    with pytest.raises(ValueError):
        blow_up(C5, 0)


@settings(max_examples=40, deadline=None)
@given(digraphs(max_n=5), st.integers(1, 3))
def test_blow_up_scales_alpha(g, t):
    assert independence_number(blow_up(g, t)) == t * independence_number(g)


def test_compose_examples():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert compose([g]) == g
    t2 = Graph.transitive_tournament(2)
    c = compose([t2, t2.reverse()])
    # vertex i*2 + k is bit i of round k; round 0 uses 0 -> 1, round 1 uses 1 -> 0
    assert edge_set(c) == {(0, 2), (1, 2), (2, 1), (3, 1)}
    with pytest.raises(ValueError):
        compose([Graph.empty(2), Graph.empty(3)])
    with pytest.raises(ValueError):
        compose([])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_compose_tournaments_edge_set(n):
    t = Graph.transitive_tournament(n)
    c = compose([t, t.reverse()])
    v = lambda i, k: i * 2 + k  # noqa: E731
    expected = set()
    for i in range(n):
        for j in range(n):
            for k in (0, 1):
                if j > i:
                    expected.add((v(i, k), v(j, 0)))  # round-0 graph: i -> j for j > i
                if j < i:
                    expected.add((v(i, k), v(j, 1)))  # round-1 graph: i -> j for j < i
    assert edge_set(c) == expected


@settings(max_examples=30, deadline=None)
@given(digraphs(max_n=4))
def test_compose_of_repeats_is_blow_up(g):
    assert compose([g, g]) == blow_up(g, 2)
    assert compose([g, g, g]) == blow_up(g, 3)


def test_disjoint_union_examples():
    assert disjoint_union([Graph.empty(1), Graph.empty(1)]) == Graph.empty(2)
    u = disjoint_union([C5, complement(C5)])
    assert u.n == 10 and u.num_edges() == 2 * (5 + 5)
    assert all((a < 5) == (b < 5) for a, b in u.edges())
    with pytest.raises(ValueError):
        disjoint_union([])


@settings(max_examples=30, deadline=None)
@given(digraphs(max_n=5), digraphs(max_n=5))
def test_union_alpha_additive(g1, g2):
    u = disjoint_union([g1, g2])
    assert independence_number(u) == ref.alpha(g1.n, edge_set(g1)) + ref.alpha(g2.n, edge_set(g2))


def test_alpha_examples():
    assert independence_number(Graph.complete(6)) == 1
    assert independence_number(Graph.empty(6)) == 6
    assert ref.alpha(5, edge_set(C5)) == 2 == independence_number(C5)
    s = max_independent_set(C5)
    assert len(s) == 2 and is_independent(C5, s)


def test_caps_raise():
    with pytest.raises(CapExceeded):
        independence_number(Graph.empty(31))
    with pytest.raises(CapExceeded):
        mais(Graph.empty(21))
    with pytest.raises(CapExceeded):
        clique_cover_number(Graph.empty(21))


def test_mais_examples():
    for n in range(1, 8):
        assert mais(Graph.transitive_tournament(n)) == n
    assert mais(Graph.complete(2)) == 1
    for n in range(1, 6):
        t = Graph.transitive_tournament(n)
        assert mais(compose([t, t.reverse()])) == n + 1


def test_max_acyclic_set_is_acyclic():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 2)])
    s = max_acyclic_set(g)
    assert len(s) == mais(g) == ref.mais(4, edge_set(g))
    assert ref.acyclic(edge_set(g), s)


def test_clique_cover_examples():
    assert clique_cover_number(Graph.complete(5)) == 1
    assert clique_cover_number(Graph.empty(5)) == 5
    assert clique_cover_number(C5) == 3
    # one-way edges do not make cliques
    assert clique_cover_number(Graph.transitive_tournament(4)) == 4
    parts = clique_cover(C5)
    assert sorted(v for p in parts for v in p) == list(range(5))


@settings(max_examples=80, deadline=None)
@given(digraphs(max_n=6))
def test_invariants_match_brute_force(g):
    e = edge_set(g)
    a = independence_number(g)
    assert a == ref.alpha(g.n, e)
    assert mais(g) == ref.mais(g.n, e)
    assert clique_cover_number(g) == ref.clique_cover(g.n, e)
    assert a <= clique_cover_number(g)
    assert mais(g) >= a


@settings(max_examples=50, deadline=None)
@given(digraphs(max_n=6, undirected=True))
def test_mais_equals_alpha_when_undirected(g):
    assert mais(g) == independence_number(g)


@settings(max_examples=50, deadline=None)
@given(digraphs(max_n=5))
def test_diagonal_independent_in_product_with_complement(g):
    sq = strong_product(g, complement(g))
    assert is_independent(sq, [u * g.n + u for u in range(g.n)])


def test_chromatic_number_against_networkx_bound():
    g = nx.petersen_graph()
    adj = [sum(1 << v for v in g[u]) for u in range(10)]
    k, colours = chromatic_number(adj)
    assert k == 3
    assert all(colours[u] != colours[v] for u, v in g.edges())
