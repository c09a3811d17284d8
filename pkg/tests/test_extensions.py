import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indexlab.extensions import (
    P4Instance,
    all_instances,
    build_gind_gcl,
    p4_confusion_graph,
    p4_ell,
    p4_minrank,
    p4_represents_check,
    reduce_to_basic,
    split_demands,
)
from indexlab.gf import FieldSpec
from indexlab.graph import Graph, blow_up, compose
from indexlab.indexcode import confusion_graph, exact_ell
from indexlab.matrix import FFMatrix, identity, ones
from indexlab.minrank import exact_minrank, minrank, represents_check

import reference as ref
from test_graph import digraphs

F2, F3 = FieldSpec(2), FieldSpec(3)


@st.composite
def instances(draw, max_m=4, max_n=3):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    wants = [draw(st.integers(0, n - 1)) for _ in range(m)]
    knows = [[j != wants[i] and draw(st.booleans()) for j in range(n)] for i in range(m)]
    return P4Instance(m, n, knows, wants)


def test_instance_validation():
    with pytest.raises(ValueError, match="already knows"):
        P4Instance(1, 2, [[True, False]], [0])
    with pytest.raises(ValueError):
        P4Instance(1, 2, [[False, False]], [2])
    with pytest.raises(ValueError):
        P4Instance(2, 2, [[False, False]], [0])
    with pytest.raises(ValueError):
        P4Instance(1, 2, [[False, False]], [0, 1])


def test_json_roundtrip():
    inst = P4Instance(2, 3, [[False, True, False], [True, False, False]], [0, 2])
    obj = json.loads(json.dumps(inst.to_json()))
    assert obj == {"m": 2, "n": 3, "wants": [0, 2], "knows": [[False, True, False], [True, False, False]]}
    assert P4Instance.from_json(obj) == inst == P4Instance.from_json(json.dumps(obj))


def test_split_demands_clones_receivers():
    inst = split_demands(3, [[False, False, True]], [[0, 1]])
    assert inst.m == 2 and inst.wants == (0, 1)
    assert inst.knows[0] == inst.knows[1] == (False, False, True)


def test_reduce_to_basic_examples():
    c5 = Graph.cycle(5)
    red = reduce_to_basic("blowup", c5, 2)
    assert red.graph == blow_up(c5, 2) and red.graph.n == 10
    assert red.demand[:3] == [(0, 0), (0, 1), (1, 0)]
    t = Graph.transitive_tournament(3)
    red = reduce_to_basic("compose", [t, t.reverse()])
    assert red.graph == compose([t, t.reverse()])
    assert reduce_to_basic("compose", [c5, c5]).graph == blow_up(c5, 2)
    with pytest.raises(ValueError):
        reduce_to_basic("blowup", c5)
    with pytest.raises(ValueError):
        reduce_to_basic("fold", c5, 2)


def test_blowup_minrank_at_most_scaled():
    c5 = Graph.cycle(5)
    assert minrank(reduce_to_basic("blowup", c5, 2).graph, F2) <= 2 * minrank(c5, F2)


def test_gind_gcl_with_distinct_demands_is_side_information_graph():
    for g in (Graph.cycle(5), Graph.transitive_tournament(4), Graph.from_edges(3, [(0, 1), (2, 1)])):
        g_ind, g_cl = build_gind_gcl(P4Instance.from_graph(g))
        assert g_ind == g_cl == g


def test_gind_gcl_shared_demand():
    inst = P4Instance(2, 1, [[False], [False]], [0, 0])
    g_ind, g_cl = build_gind_gcl(inst)
    assert g_ind == Graph.empty(2) and g_cl == Graph.complete(2)
    inst = P4Instance(3, 2, [[False, True], [False, False], [True, False]], [0, 0, 1])
    g_ind, g_cl = build_gind_gcl(inst)
    assert set(g_ind.edges()) == {(0, 2), (2, 0), (2, 1)}
    assert set(g_cl.edges()) == {(0, 1), (1, 0), (0, 2), (2, 0), (2, 1)}


def test_p4_represents_examples():
    inst = P4Instance(2, 1, [[False], [False]], [0, 0])
    assert p4_represents_check(FFMatrix(F2, [[1], [1]]), inst) == []
    bad = p4_represents_check(FFMatrix(F2, [[1], [0]]), inst)
    assert [(v.row, v.kind) for v in bad] == [(1, "zero-diagonal")]
    inst = P4Instance(1, 3, [[False, True, False]], [0])
    bad = p4_represents_check(FFMatrix(F2, [[1, 1, 1]]), inst)
    assert [(v.row, v.col, v.kind) for v in bad] == [(0, 2, "nonzero-off-edge")]
    with pytest.raises(ValueError):
        p4_represents_check(identity(F2, 2), inst)


@settings(max_examples=60, deadline=None)
@given(digraphs(max_n=4), st.randoms(use_true_random=False))
def test_p4_check_agrees_with_graph_check_on_diagonal_instances(g, rnd):
    a = np.array([[rnd.randrange(2) for _ in range(g.n)] for _ in range(g.n)], dtype=np.int64)
    m = FFMatrix(F2, a)
    ours = p4_represents_check(m, P4Instance.from_graph(g))
    assert [tuple(v) for v in ours] == [tuple(v) for v in represents_check(m, g)]


def test_p4_minrank_examples():
    inst = P4Instance(2, 1, [[False], [False]], [0, 0])
    res = p4_minrank(inst, F2)
    assert res.value == 1 and res.optimal and res.witness.tolist() == [[1], [1]]
    for n in range(1, 5):
        blind = P4Instance(n, n, [[False] * n] * n, list(range(n)))
        assert p4_minrank(blind, F3).value == n


def test_p4_minrank_distinct_demands_equals_graph_minrank():
    for g in (Graph.cycle(5), Graph.cycle(4), Graph.complete(3), Graph.transitive_tournament(3)):
        for f in (F2, F3):
            assert p4_minrank(P4Instance.from_graph(g), f).value == minrank(g, f)


def test_duplicate_receivers_change_nothing():
    blind = P4Instance(2, 1, [[False], [False]], [0, 0])
    assert p4_minrank(blind, F2).value == p4_minrank(blind.without(1), F2).value == 1
    inst = P4Instance(3, 2, [[False, True], [False, True], [True, False]], [0, 0, 1])
    assert p4_minrank(inst, F2).value == p4_minrank(inst.without(1), F2).value
    assert p4_ell(inst).value == p4_ell(inst.without(1)).value


@settings(max_examples=60, deadline=None)
@given(instances())
def test_p4_minrank_sandwich(inst):
    g_ind, g_cl = build_gind_gcl(inst)
    res = p4_minrank(inst, F2, budget=None)
    assert res.optimal and not p4_represents_check(res.witness, inst)
    assert minrank(g_cl, F2) <= res.value <= minrank(g_ind, F2)


@settings(max_examples=40, deadline=None)
@given(instances(max_m=3, max_n=3))
def test_p4_ell_sandwich(inst):
    g_ind, g_cl = build_gind_gcl(inst)
    ell = p4_ell(inst).value
    assert exact_ell(g_cl).value <= ell <= exact_ell(g_ind).value
    assert ell <= p4_minrank(inst, F2).value


def test_p4_minrank_matches_brute_force_small():
    # rank over every matrix on the allowed support with a unit demanded entry
    r2 = ref.RefField(2)
    for inst in all_instances(2, 2):
        free = [(i, j) for i in range(inst.m) for j in range(inst.n) if inst.knows[i][j]]
        best = inst.m
        for bits in range(1 << len(free)):
            a = [[0] * inst.n for _ in range(inst.m)]
            for i, w in enumerate(inst.wants):
                a[i][w] = 1
            for t, (i, j) in enumerate(free):
                a[i][j] = bits >> t & 1
            best = min(best, ref.rank(a, r2))
        assert p4_minrank(inst, F2).value == best


def test_p4_confusion_graph_reduces_to_graph_version():
    g = Graph.cycle(4)
    assert p4_confusion_graph(P4Instance.from_graph(g)).adj == confusion_graph(g).adj


def test_all_instances_counts():
    # each receiver picks a demand and a subset of the other bits
    assert sum(1 for _ in all_instances(1, 3)) == 3 * 4
    assert sum(1 for _ in all_instances(2, 2)) == (2 * 2) ** 2


def test_shared_demand_minrank_beats_distinct():
    inst = P4Instance(3, 1, [[False]] * 3, [0, 0, 0])
    assert p4_minrank(inst, F2).value == 1
    assert exact_minrank(Graph.empty(3), F2).value == 3
    assert p4_minrank(inst, F2).witness == ones(F2, 3, 1)
