import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from helpers import GRAPH, NAMED, graph, hom, names

from dyntrace.colimits import (AttributeConflict, BudgetExceeded, GluingViolation, PartialMap,
                               compose_partial, copair, coproduct, initial_acset, initial_morphism,
                               mono_inverse, push_forward, pushout, pushout_complement,
                               verify_pushout)
from dyntrace.schema import Var, compose, identity, is_natural, isomorphic


def cycle(n):
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def test_initial_object():
    O = initial_acset(GRAPH)
    assert O.total_parts() == 0
    assert initial_morphism(cycle(3)).cod == cycle(3)


class TestPushout:
    def test_coproduct_of_two_cycles(self):
        P, i1, i2 = coproduct(cycle(3), cycle(3))
        assert P.counts == {"V": 6, "E": 6}
        assert set(i1["V"]).isdisjoint(i2["V"])

    def test_copair_is_the_mediating_map(self):
        X = cycle(3)
        P, i1, i2 = coproduct(X, X)
        u = copair(identity(X), identity(X), i1, i2)
        assert compose(i1, u) == identity(X) and compose(i2, u) == identity(X)

    def test_glue_edges_at_a_vertex(self):
        A, e = graph(1), graph(2, [(0, 1)])
        P, px, py = pushout(hom(A, e, V=[1]), hom(A, e, V=[0]))
        assert P.counts == {"V": 3, "E": 2}
        assert isomorphic(P, graph(3, [(0, 1), (1, 2)]))

    def test_over_the_initial_object_is_the_coproduct(self):
        X, Y = cycle(2), graph(2, [(0, 1)])
        P, _, _ = pushout(initial_morphism(X), initial_morphism(Y))
        Q, _, _ = coproduct(X, Y)
        assert P == Q

    def test_identity_span(self):
        X = cycle(3)
        P, px, py = pushout(identity(X), identity(X))
        assert isomorphic(P, X) and px == py

    def test_variable_unifies_with_constant(self):
        A = graph(1, schema=NAMED)
        X = graph(1, schema=NAMED, names=["a"])
        Y = graph(1, schema=NAMED, names=[Var(7)])
        P, _, _ = pushout(hom(A, X, V=[0]), hom(A, Y, V=[0]))
        assert names(P) == ["a"]

    def test_conflicting_constants(self):
        A = graph(1, schema=NAMED)
        X = graph(1, schema=NAMED, names=["a"])
        Y = graph(1, schema=NAMED, names=["b"])
        with pytest.raises(AttributeConflict):
            pushout(hom(A, X, V=[0]), hom(A, Y, V=[0]))

    def test_universal_property_small(self):
        A, e = graph(1), graph(2, [(0, 1)])
        f, g = hom(A, e, V=[1]), hom(A, e, V=[0])
        P, px, py = pushout(f, g)
        assert verify_pushout(f, g, P, px, py, budget=10)

    def test_wrong_cocone_fails_verification(self):
        A, e = graph(1), graph(2, [(0, 1)])
        f, g = hom(A, e, V=[1]), hom(A, e, V=[0])
        P, i1, i2 = coproduct(e, e)
        assert not verify_pushout(f, g, P, i1, i2, budget=10)

    def test_budget(self):
        X = cycle(3)
        with pytest.raises(BudgetExceeded):
            verify_pushout(identity(X), identity(X), X, identity(X), identity(X), budget=3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_pushout_counts_agree_with_union_find(seed):
    rng = random.Random(seed)
    s = oracles.random_schema(rng, max_tables=3)
    Y = oracles.random_instance(rng, s, max_parts=3)
    X = oracles.random_instance(rng, s, max_parts=3)
    A = oracles.random_instance(rng, s, max_parts=2, p_var=0.6, total_cap=3)
    fs, gs = oracles.brute_homs(A, X, False), oracles.brute_homs(A, Y, False)
    if not fs or not gs:
        return
    from dyntrace.schema import infer_morphism
    f = infer_morphism(A, X, fs[rng.randrange(len(fs))][0])
    g = infer_morphism(A, Y, gs[rng.randrange(len(gs))][0])
    want = oracles.naive_pushout_acset(A, X, Y, f.components, g.components)
    if want is None:
        with pytest.raises(AttributeConflict):
            pushout(f, g)
        return
    P, px, py = pushout(f, g)
    assert isomorphic(P, want)
    assert is_natural(px) and is_natural(py)
    assert compose(f, px) == compose(g, py)


class TestComplement:
    def test_delete_edge_of_cycle(self):
        L, K, X = graph(2, [(0, 1)]), graph(2), cycle(3)
        l = hom(K, L, V=[0, 1])
        m = hom(L, X, V=[0, 1], E=[0])
        k, d = pushout_complement(l, m)
        D = d.dom
        assert D.counts == {"V": 3, "E": 2}
        assert is_natural(k) and is_natural(d)
        P, _, _ = pushout(l, k)
        assert isomorphic(P, X)

    def test_delete_vertex_with_incident_edge(self):
        L, K = graph(1), graph(0)
        X = graph(2, [(0, 1)])
        with pytest.raises(GluingViolation) as info:
            pushout_complement(hom(K, L), hom(L, X, V=[0]))
        assert info.value.kind == "dangling"

    def test_identification_of_deleted_and_kept(self):
        L, K = graph(2), graph(1)
        X = graph(1)
        with pytest.raises(GluingViolation) as info:
            pushout_complement(hom(K, L, V=[0]), hom(L, X, V=[0, 0]))
        assert info.value.kind == "identification"

    def test_identification_of_two_deleted_parts(self):
        L, K, X = graph(2), graph(0), graph(1)
        with pytest.raises(GluingViolation):
            pushout_complement(hom(K, L), hom(L, X, V=[0, 0]))

    def test_kept_parts_may_be_identified(self):
        L = K = graph(2)
        X = graph(1)
        k, d = pushout_complement(identity(K), hom(L, X, V=[0, 0]))
        assert d.dom.counts == {"V": 1, "E": 0}


class TestPartialMaps:
    def test_identity_laws(self):
        X = cycle(3)
        p = mono_inverse(hom(graph(2, [(0, 1)]), X, V=[0, 1], E=[0]))
        assert compose_partial(PartialMap.identity(X), p) == p
        assert compose_partial(p, PartialMap.identity(p.cod)) == p

    def test_associativity(self):
        A = graph(3, [(0, 1), (1, 2)])
        B = graph(2, [(0, 1)])
        C = graph(1)
        p = mono_inverse(hom(B, A, V=[0, 1], E=[0]))
        q = mono_inverse(hom(C, B, V=[1]))
        r = PartialMap.total(hom(C, graph(2), V=[1]))
        lhs = compose_partial(compose_partial(p, q), r)
        rhs = compose_partial(p, compose_partial(q, r))
        assert lhs == rhs and lhs["V"] == (None, 1, None)

    def test_empty_map_is_undefined(self):
        p = PartialMap.empty(cycle(2), graph(1))
        assert p.defined("V") == [] and not p.is_total()

    def test_push_forward_survives_or_not(self):
        X = cycle(3)
        keep = mono_inverse(hom(graph(3, [(0, 1)]), X, V=[0, 1, 2], E=[0]))
        f = hom(graph(1), X, V=[2])
        assert push_forward(f, keep)["V"] == (2,)
        edge = hom(graph(2, [(0, 1)]), X, V=[1, 2], E=[1])
        assert push_forward(edge, keep) is None
