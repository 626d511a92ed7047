import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gnb.data import DiscreteTable
from gnb.empirical import Entropies, structure_weight_gnb, structure_weight_nb
from gnb.learn import (NO_EDGE, best_triplet, build_aux_graph, learn, learn_gnb_a, learn_gnb_o, learn_nb,
                       learn_tan, max_arborescence, tan_edges)
from gnb.structure import GnbStructure, StructureError, from_tree, prefix, validate
from oracles import best_arborescence_weight, brute_info, prufer_trees, random_counts, random_table, table_from_counts


def test_two_attributes_give_one_triplet():
    rng = np.random.default_rng(1)
    t = random_table(rng, 50, (2, 3, 2))
    s, trace = learn_gnb_a(t)
    assert s.order == (1, 2) and s.mother == {2: 1}
    assert math.isclose(trace.weight, brute_info(t, (0, 1, 2)), abs_tol=1e-12)
    o, trace_o, w = learn_gnb_o(t)
    assert o == s
    assert math.isclose(w, trace.weight, abs_tol=1e-12)


def test_copy_of_class_is_in_first_triplet():
    rng = np.random.default_rng(2)
    y = rng.integers(0, 2, size=200)
    codes = np.column_stack([y, rng.integers(0, 2, 200), rng.integers(0, 2, 200), y])
    t = DiscreteTable.from_codes(codes, (2, 2, 2, 2))
    s, _ = learn_gnb_a(t)
    assert 3 in s.order[:2]


@given(st.integers(0, 10_000))
def test_gnb_a_steps_are_exhaustive_argmax(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng, 200, (2, 3, 2, 3, 2, 3))
    s, trace = learn_gnb_a(t)
    i1, i2 = s.order[:2]
    best = max(brute_info(t, (0, a, b)) for a, b in itertools.combinations(t.attributes, 2))
    assert math.isclose(trace.steps[0].increment, best, abs_tol=1e-9)
    assert i1 < i2
    for k in range(2, len(s.order)):
        placed, rest = s.order[:k], [a for a in t.attributes if a not in s.order[:k]]
        cands = [brute_info(t, (0, m, a)) - brute_info(t, (0, m)) for m in placed for a in rest]
        assert math.isclose(trace.steps[k - 1].increment, max(cands), abs_tol=1e-9)
    assert all(step.increment >= -1e-9 for step in trace.steps)
    assert math.isclose(trace.weight, structure_weight_gnb(t, s), abs_tol=1e-9)


def test_ties_resolve_to_smaller_indices():
    # all attributes identical copies: every triplet and every increment ties
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, 100)
    y = rng.integers(0, 2, 100)
    t = DiscreteTable.from_codes(np.column_stack([y, x, x, x, x]), (2, 2, 2, 2, 2))
    s, _ = learn_gnb_a(t)
    assert s.order == (1, 2, 3, 4)
    assert s.mother == {2: 1, 3: 1, 4: 1}
    assert best_triplet(t, Entropies(t)) == (1, 2)


def test_aux_graph_edge_rules():
    rng = np.random.default_rng(5)
    t = random_table(rng, 150, (2, 3, 2, 3, 2))
    S = build_aux_graph(t)
    i1, i2 = S.first_pair
    M = S.matrix
    assert math.isclose(M[i1, 0], brute_info(t, (0, S.labels[i1])), abs_tol=1e-9)
    assert math.isclose(M[i2, i1], brute_info(t, (S.labels[i1], S.labels[i2])), abs_tol=1e-9)
    for j in range(M.shape[0]):
        if j != i1:
            assert M[i2, j] == NO_EDGE
        if j != 0:
            assert M[i1, j] == NO_EDGE
        assert M[j, j] == NO_EDGE
    for j1 in range(1, M.shape[0]):
        if j1 in (i1, i2):
            continue
        assert M[j1, 0] == NO_EDGE
        for j2 in range(1, M.shape[0]):
            if j2 != j1:
                a, m = S.labels[j1], S.labels[j2]
                want = brute_info(t, (0, a, m)) - brute_info(t, (0, m))
                assert math.isclose(M[j1, j2], want, abs_tol=1e-9)


def test_aux_graph_for_two_attributes():
    rng = np.random.default_rng(4)
    S = build_aux_graph(random_table(rng, 30, (2, 2, 2)))
    assert sorted((p, c) for p, c, _ in S.edges()) == [(0, 1), (1, 2)]


def test_forced_edges_only():
    M = np.full((3, 3), NO_EDGE)
    M[1, 0], M[2, 1] = 0.7, 0.2
    arb = max_arborescence(M)
    assert arb.parent == {1: 0, 2: 1}
    assert math.isclose(arb.weight, 0.9)


def random_graph(rng, n, density=0.7, cycle=False):
    M = np.where(rng.random((n, n)) < density, rng.normal(size=(n, n)), NO_EDGE)
    np.fill_diagonal(M, NO_EDGE)
    M[1:, 0] = np.where(np.isfinite(M[1:, 0]), M[1:, 0], rng.normal(size=n - 1) - 5)
    if cycle and n >= 3:
        a, b = rng.choice(range(1, n), size=2, replace=False)
        M[a, b] = M[b, a] = 10.0
    return M


@given(st.integers(0, 10_000), st.integers(2, 6), st.booleans())
def test_arborescence_matches_enumeration(seed, n, cycle):
    rng = np.random.default_rng(seed)
    M = random_graph(rng, n, cycle=cycle)
    arb = max_arborescence(M)
    assert arb.problems() == []
    assert all(np.isfinite(M[v, p]) for v, p in arb.parent.items())
    assert math.isclose(arb.weight, sum(M[v, p] for v, p in arb.parent.items()), abs_tol=1e-9)
    assert math.isclose(arb.weight, best_arborescence_weight(M), abs_tol=1e-9)


def test_unreachable_vertex_is_an_error():
    M = np.full((3, 3), NO_EDGE)
    M[1, 0] = 1.0
    with pytest.raises(StructureError):
        max_arborescence(M)


@given(st.integers(0, 10_000))
def test_gnb_o_weight_identity_and_prefixes(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng, 150, (2, 3, 3, 2, 3, 2))
    s, trace, w = learn_gnb_o(t)
    assert math.isclose(w, structure_weight_gnb(t, s), abs_tol=1e-9)
    assert math.isclose(trace.weight, w, abs_tol=1e-9)
    for k in range(2, len(s.order) + 1):
        assert validate(prefix(s, k), t.n_columns) == []
    a, _ = learn_gnb_a(t)
    assert s.order[:2] == a.order[:2]


def _best_weight_with_triplet(t, pair):
    ent = Entropies(t)
    best = -math.inf
    for edges in prufer_trees(t.attributes):
        if frozenset(pair) not in {frozenset(e) for e in edges}:
            continue
        s = from_tree(t.class_column, edges, pair[0])
        best = max(best, structure_weight_gnb(t, s, ent))
    return best


@given(st.integers(0, 10_000), st.integers(2, 5))
def test_gnb_o_is_optimal_among_trees_with_the_best_triplet(seed, d):
    rng = np.random.default_rng(seed)
    cards = tuple(int(k) for k in rng.integers(2, 4, size=d + 1))
    t = random_table(rng, 80, cards)
    s, _, w = learn_gnb_o(t)
    assert w >= _best_weight_with_triplet(t, s.order[:2]) - 1e-9


@given(st.integers(0, 10_000))
def test_dominance(seed):
    rng = np.random.default_rng(seed)
    t = table_from_counts(random_counts(rng, (2, 3, 2, 2, 3)))
    ent = Entropies(t)
    wa = learn_gnb_a(t, ent)[1].weight
    wo = learn_gnb_o(t, ent)[2]
    wn = structure_weight_nb(t, ent=ent)
    assert wo >= wa - 1e-9
    assert wa >= wn - 1e-9


def test_nb_structure():
    rng = np.random.default_rng(0)
    t = random_table(rng, 40, (2, 2, 3, 2))
    s = learn_nb(t)
    assert s.clusters() == [(0, 1), (0, 2), (0, 3)]


def test_tan_two_attributes_and_independence():
    rng = np.random.default_rng(0)
    t = random_table(rng, 40, (2, 2, 3))
    assert learn_tan(t) == GnbStructure(0, (1, 2), {2: 1})
    indep = table_from_counts(np.ones((2, 2, 2, 2), dtype=int))
    edges = tan_edges(indep)
    assert all(abs(w) < 1e-12 for _, _, w in edges)
    assert [(i, j) for i, j, _ in edges] == [(1, 2), (1, 3)]


@given(st.integers(0, 10_000))
def test_tan_tree_is_maximum(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng, 120, (2, 3, 2, 3, 2, 2))
    ent = Entropies(t)

    def cmi(i, j):
        return ent.cond_mutual_info(i, j, 0)

    got = sum(w for _, _, w in tan_edges(t, ent))
    best = max(sum(cmi(i, j) for i, j in edges) for edges in prufer_trees(t.attributes))
    assert math.isclose(got, best, abs_tol=1e-9)
    s = learn_tan(t)
    assert s.order[0] == 1 and validate(s, t.n_columns) == []


def test_learners_are_deterministic():
    rng = np.random.default_rng(9)
    t = random_table(rng, 100, (2, 3, 2, 3, 2))
    for algo in ("gnb-a", "gnb-o", "nb", "tan"):
        a, b = learn(t, algo), learn(t, algo)
        assert a.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        learn(t, "bogus")
    with pytest.raises(ValueError):
        learn_gnb_a(DiscreteTable.from_codes([[0, 1], [1, 0]], (2, 2)))
