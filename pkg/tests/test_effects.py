import pytest
from hypothesis import given, settings, strategies as st

from dyntrace.effects import (DIST, LIST, MAYBE, RAISED, EffectKind, NormalizationError, bind,
                              choice, dist, effects_equal, empty, fmap, from_list, is_normalized,
                              pure, rng_state, sample, spawn_states, throw)


def test_dist_branches_merge():
    e = dist([(0.5, "a"), (0.5, "b")])
    r = bind(e, lambda _: pure(DIST, "c"))
    assert r.values == ("c",) and r.weights == (1.0,)


def test_list_exception_absorbs():
    e = from_list([1, 2, 3])
    r = bind(e, lambda x: throw(LIST) if x == 2 else pure(LIST, x))
    assert r.raised


def test_dist_exception_absorbs_even_at_small_weight():
    e = dist([(0.999, "a"), (0.001, "b")])
    assert bind(e, lambda x: throw(DIST) if x == "b" else pure(DIST, x)).raised


def test_empty_list_is_not_exceptional():
    z = empty(LIST)
    assert z.values == () and not z.raised
    r = bind(z, lambda x: throw(LIST))
    assert r.values == () and not r.raised
    with pytest.raises(ValueError):
        empty(MAYBE)


def test_weights_must_be_normalized():
    with pytest.raises(NormalizationError):
        dist([(0.5, "a"), (0.4, "b")])
    with pytest.raises(NormalizationError):
        dist([(-0.1, "a"), (1.1, "b")])
    e = dist([(2, "a"), (6, "b")], normalize=True)
    assert e.weights == (0.25, 0.75) and is_normalized(e)


def test_zero_weights_are_dropped():
    assert dist([(0.0, "a"), (1.0, "b")]).values == ("b",)


def test_fmap_merges():
    e = fmap(dist([(0.25, 1), (0.75, -1)]), abs)
    assert e.values == (1,) and e.weights == (1.0,)


def test_choice_per_kind():
    assert choice(LIST, ["a", "b"]).values == ("a", "b")
    assert choice(DIST, ["a", "b"]).weights == (0.5, 0.5)
    assert choice(MAYBE, ["a"]).values == ("a",)
    with pytest.raises(ValueError):
        choice(MAYBE, ["a", "b"])


def test_continuation_kind_is_checked():
    with pytest.raises(TypeError):
        bind(pure(MAYBE, 1), lambda x: pure(LIST, x))


def test_effects_equal_tolerance():
    a = dist([(0.3, "x"), (0.7, "y")])
    b = dist([(0.7 + 5e-10, "y"), (0.3 - 5e-10, "x")])
    assert effects_equal(a, b)
    assert not effects_equal(a, dist([(0.31, "x"), (0.69, "y")]))
    assert not effects_equal(throw(LIST), empty(LIST))
    assert not effects_equal(from_list([1, 2]), from_list([2, 1]))


def test_kind_parse():
    assert EffectKind.parse("Dist") is DIST
    with pytest.raises(ValueError):
        EffectKind.parse("set")


class TestSampling:
    def test_reproducible(self):
        e = dist([(0.2, "a"), (0.3, "b"), (0.5, "c")])
        draws = []
        for _ in range(2):
            st_ = rng_state(42)
            seq = []
            for _ in range(50):
                v, st_ = sample(e, st_)
                seq.append(v)
            draws.append(seq)
        assert draws[0] == draws[1] and set(draws[0]) == {"a", "b", "c"}

    def test_point_mass_consumes_nothing(self):
        s0 = rng_state(3)
        v, s1 = sample(pure(DIST, "x"), s0)
        assert v == "x" and s1 == s0

    def test_exception_passes_through(self):
        assert sample(throw(DIST), rng_state(0))[0] is RAISED

    def test_frequencies(self):
        e = dist([(0.25, 0), (0.75, 1)])
        s = rng_state(7)
        hits = 0
        for _ in range(4000):
            v, s = sample(e, s)
            hits += v
        assert abs(hits / 4000 - 0.75) < 0.03

    def test_spawned_streams_differ(self):
        a, b = spawn_states(1, 2)
        assert a != b


values = st.integers(-3, 3)


@settings(max_examples=80, deadline=None)
@given(st.lists(values, min_size=1, max_size=4), st.integers(0, 3))
def test_list_associativity(xs, k):
    f = lambda x: from_list([x, x + k])
    g = lambda y: throw(LIST) if y == 5 else from_list([y * 2])
    e = from_list(xs)
    assert effects_equal(bind(bind(e, f), g), bind(e, lambda x: bind(f(x), g)))
