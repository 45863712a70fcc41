import random

import pytest

from helpers import GRAPH, graph

from dyntrace.migration import (MigrationError, SchemaFunctor, compose_functors, delta_migrate,
                                delta_migrate_morphism, delta_migrate_rule,
                                delta_migrate_schedule, identity_functor)
from dyntrace.scheduler import typecheck
from dyntrace.schema import ACSetBuilder, Schema, identity, is_natural
from dyntrace.wolfsheep import (SCHEMA, SHEEP, SWAP, WOLF, Params, move_rule, sheep_routine,
                                shared_rules)

VERTS = Schema(("V",), name="Verts")
PICK_V = SchemaFunctor(VERTS, GRAPH, {"V": "V"})


def world(wolves, sheep):
    b = ACSetBuilder(SCHEMA)
    b.add_part("V", grass=0)
    b.add_part("V", grass=5)
    for i in range(wolves):
        b.add_part("Wolf", w_pos=i % 2, w_eng=10 + i, w_dir="N")
    for i in range(sheep):
        b.add_part("Sheep", s_pos=1, s_eng=3 + i, s_dir="S")
    return b.build()


def test_identity_functor():
    X = world(1, 2)
    assert delta_migrate(identity_functor(SCHEMA), X) == X


def test_swap_exchanges_populations():
    Y = delta_migrate(SWAP, world(2, 1))
    assert Y.nparts("Wolf") == 1 and Y.nparts("Sheep") == 2
    assert list(Y.attr("s_eng")) == [10, 11] and list(Y.hom("s_pos")) == [0, 1]


def test_swap_is_an_involution():
    X = world(2, 3)
    assert delta_migrate(SWAP, delta_migrate(SWAP, X)) == X
    assert compose_functors(SWAP, SWAP).ob == identity_functor(SCHEMA).ob


def test_vertex_picking_functor():
    V = delta_migrate(PICK_V, graph(4, [(0, 1)]))
    assert V.counts == {"V": 4}


def test_composition_is_contravariant():
    F = identity_functor(GRAPH)
    G = PICK_V
    X = graph(3, [(0, 1), (2, 2)])
    assert delta_migrate(compose_functors(G, F), X) == delta_migrate(G, delta_migrate(F, X))


def test_migrated_morphisms_stay_natural():
    rng = random.Random(2)
    for _ in range(30):
        X = world(rng.randrange(3), rng.randrange(3))
        Y = delta_migrate(SWAP, X)
        f = delta_migrate_morphism(SWAP, identity(X))
        assert is_natural(f) and f.dom == Y


def test_rule_migration():
    assert delta_migrate_rule(identity_functor(SCHEMA), move_rule(SHEEP, 1)) == move_rule(SHEEP, 1)
    assert delta_migrate_rule(SWAP, move_rule(SHEEP, 1)) == move_rule(WOLF, 1)
    p = Params()
    sheep, wolf = shared_rules(SHEEP, p), shared_rules(WOLF, p)
    for k, r in sheep.items():
        assert delta_migrate_rule(SWAP, r) == wolf[k]


def test_migrated_routine_typechecks():
    s = sheep_routine(Params())
    assert typecheck(s) == []
    predicates = {name: (lambda t: 1) for name, g in s.boxes.items()
                  if getattr(g, "predicate", None) is not None and not hasattr(g.predicate, "expr")}
    assert typecheck(delta_migrate_schedule(SWAP, s, predicates)) == []


def test_bad_functors():
    broken = SchemaFunctor(GRAPH, GRAPH, {"V": "V", "E": "E"}, {"src": "tgt"}, {})
    assert any("tgt" in v or "src" in v for v in broken.violations())
    wrong_ends = SchemaFunctor(GRAPH, GRAPH, {"V": "E", "E": "E"}, {"src": "src", "tgt": "tgt"})
    assert wrong_ends.violations()
    with pytest.raises(MigrationError):
        delta_migrate(broken, graph(1))
    with pytest.raises(MigrationError):
        delta_migrate(PICK_V, world(1, 1))
