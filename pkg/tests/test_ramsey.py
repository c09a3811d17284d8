import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from indexlab.gf import FieldSpec
from indexlab.graph import CapExceeded, Graph, complement, disjoint_union
from indexlab.matrix import identity
from indexlab.ramsey import (
    RamseyParams,
    _product_edge,
    asymptotic_bound,
    build_PQ,
    build_ramsey_graph,
    build_union_H,
    colex_rank,
    colex_subsets,
    find_params,
    inclusion_matrix,
    inclusion_rank,
    relabel,
    verify_construction,
)

F2, F3 = FieldSpec(2), FieldSpec(3)
PARAMS = RamseyParams.from_exponents(3, 2, 1, 1)


@pytest.fixture(scope="module")
def inst252():
    return build_ramsey_graph(PARAMS, r_override=10)


def test_find_params_examples():
    pr = find_params(3, 2, Fraction(51, 100))
    assert (pr.k, pr.l, pr.s, pr.r) == (1, 1, 5, 27)
    assert find_params(3, 2, 0.51) == pr
    with pytest.raises(ValueError, match="no k"):
        find_params(2, 3, Fraction(1, 10), k_max=3)


@pytest.mark.parametrize("p,q,eps", [(2, 3, "0.5"), (3, 2, "0.2"), (5, 2, "0.3"), (2, 5, "0.3"), (3, 5, "0.1")])
def test_find_params_postconditions(p, q, eps):
    pr = find_params(p, q, eps)
    e = Fraction(eps)
    assert pr.ql < pr.pk and pr.pk < (1 + e) * pr.ql
    assert pr.q ** (pr.l + 1) > pr.pk  # l is the floor of k log_q p
    assert pr.s == pr.pk * pr.ql - 1 and pr.r == pr.p ** (3 * pr.k)
    # k is the smallest that works
    for k in range(1, pr.k):
        pk = p**k
        l = max(j for j in range(0, 64) if q**j <= pk)
        assert l == 0 or not (q**l < pk < (1 + e) * q**l)


def test_params_validation():
    with pytest.raises(ValueError):
        RamseyParams.from_exponents(2, 3, 1, 1)  # 3 > 2
    with pytest.raises(ValueError):
        RamseyParams.from_exponents(3, 3, 1, 1)
    with pytest.raises(ValueError):
        RamseyParams.from_exponents(3, 2, 1, 1, r=4)
    with pytest.raises(ValueError):
        find_params(3, 2, 0)


def test_colex_order_and_rank():
    subs = colex_subsets(5, 2)
    assert subs[:4] == [(0, 1), (0, 2), (1, 2), (0, 3)]
    assert [colex_rank(s) for s in subs] == list(range(len(subs)))


def test_instance_examples(inst252):
    assert inst252.n == math.comb(10, 5) == 252
    a = inst252.index_of((0, 1, 2, 3, 4))
    b = inst252.index_of((0, 1, 5, 6, 7))
    c = inst252.index_of((0, 5, 6, 7, 8))
    assert inst252.adjacent(a, b) and inst252.graph.has_edge(a, b)
    assert not inst252.adjacent(a, c) and not inst252.graph.has_edge(a, c)


def test_graph_matches_predicate(inst252):
    g = inst252.graph
    assert g.is_undirected()
    sets = [set(v) for v in inst252.vertices.tolist()]
    for a, b in itertools.combinations(range(0, 252, 7), 2):
        assert g.has_edge(a, b) == (len(sets[a] & sets[b]) % 3 == 2)


def test_vertex_cap():
    with pytest.raises(CapExceeded):
        build_ramsey_graph(PARAMS, vertex_cap=1000)


def test_inclusion_matrix_examples():
    m = inclusion_matrix(3, 2, 1, F2)
    assert m.shape == (3, 3)
    assert m.tolist()[0] == [1, 1, 0]  # {0,1} contains {0} and {1}
    assert inclusion_matrix(6, 3, 0, F3).tolist() == [[1]] * 20
    assert inclusion_matrix(6, 3, 3, F3) == identity(F3, 20)
    with pytest.raises(ValueError):
        inclusion_matrix(5, 2, 3, F2)


def test_inclusion_matrix_is_containment():
    m = inclusion_matrix(7, 3, 2, F2)
    rows, cols = colex_subsets(7, 3), colex_subsets(7, 2)
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            assert m[i, j] == int(set(b) <= set(a))


def test_PQ_examples(inst252):
    pq = build_PQ(inst252)
    assert pq.literal_checked
    assert math.comb(5, 2) % 3 == 1 and math.comb(5, 1) % 2 == 1
    assert np.all(np.diagonal(pq.P.entries) == 1) and np.all(np.diagonal(pq.Q.entries) == 1)
    inter = inst252.intersections
    off = (inter <= 1) & ~np.eye(252, dtype=bool)
    assert np.all(pq.P.entries[off] == 0)


def test_verify_construction_252(inst252):
    rep = verify_construction(inst252)
    assert rep.passed
    assert rep.rank_p_P <= 45 == rep.col_bound_p
    assert rep.rank_q_Q <= 10 == rep.col_bound_q
    assert rep.minrk_lower_q == math.ceil(252 / rep.rank_q_Q) >= 26


SMALL_PARAMS = [(3, 2, 1, 1, r) for r in (5, 6, 7, 8, 9, 11, 12)] + [
    (5, 2, 1, 2, 20), (5, 2, 1, 2, 21), (5, 3, 1, 1, 16), (5, 3, 1, 1, 17), (7, 2, 1, 2, 29), (7, 3, 1, 1, 22),
    (7, 5, 1, 1, 36),
]


@pytest.mark.parametrize("p,q,k,l,r", SMALL_PARAMS)
def test_construction_verifies_for_small_params(p, q, k, l, r):
    pr = RamseyParams.from_exponents(p, q, k, l, r)
    if math.comb(pr.r, pr.s) > 10_000:
        pytest.skip("beyond the exhaustive size")
    inst = build_ramsey_graph(pr)
    pq = build_PQ(inst)
    rep = verify_construction(inst, pq)
    assert rep.passed and not rep.p_violations and not rep.q_violations and rep.crt_violations == 0
    assert np.all(np.diagonal(pq.P.entries) == 1) and np.all(np.diagonal(pq.Q.entries) == 1)


def test_inclusion_rank_streams(inst252):
    assert inclusion_rank(10, 5, 2, F3) == verify_construction(inst252).rank_p_P


def test_vertex_transitivity_spot_check(inst252):
    rng = np.random.default_rng(8)
    adj = inst252.graph.adjacency_matrix()
    for _ in range(5):
        perm = relabel(inst252, rng.permutation(10))
        assert sorted(perm.tolist()) == list(range(252))
        assert np.array_equal(adj[np.ix_(perm, perm)], adj)


def test_union_witness_on_c5():
    uw = build_union_H(Graph.cycle(5))
    assert uw.H.n == 10 and uw.size == 10 and uw.independent
    assert uw.capacity_lower_bound == pytest.approx(math.sqrt(10))


def test_union_witness_detects_bad_pairs():
    h = Graph.from_edges(2, [(0, 1)])
    assert _product_edge(h.adj, (0, 0), (1, 1))
    assert not _product_edge(h.adj, (1, 1), (0, 0))


def test_union_witness_252(inst252):
    uw = build_union_H(inst252)
    assert uw.size == 504 and uw.independent
    assert uw.H == disjoint_union([inst252.graph, complement(inst252.graph)])


def test_asymptotic_bound_examples():
    vals = [asymptotic_bound(n) for n in (3, 10, 100, 10**3, 10**6, 10**9)]
    assert vals == sorted(vals)
    ratios = [asymptotic_bound(n) / n for n in (10**3, 10**6, 10**9)]
    assert ratios == sorted(ratios, reverse=True)
    assert asymptotic_bound(math.e**math.e) == pytest.approx(math.exp(math.sqrt(2 * math.e)))
    with pytest.raises(ValueError):
        asymptotic_bound(2)
