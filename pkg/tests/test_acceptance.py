"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line; the lines are repeated in the terminal
summary.  Tolerances and limits are pinned below.
"""
from __future__ import annotations

import dataclasses
import math
import os
import random
import subprocess
import sys
import time

import pytest

import oracles
from helpers import GRAPH, NAMED, graph, hom
from report import TABLES, criterion

from dyntrace.colimits import (AttributeConflict, GluingViolation, initial_acset, initial_morphism,
                               pushout, pushout_complement, verify_pushout)
from dyntrace.effects import (DIST, LIST, MAYBE, bind, dist, effects_equal, fmap, from_list, pure,
                              throw)
from dyntrace.mealy import (MealyMachine, behavior_tree, behaviorally_equal, compose, copair,
                            random_machine, structural, tensor, trace, trap, trap2,
                            trap2_components, trap2_state, trap2_states)
from dyntrace.migration import delta_migrate_rule
from dyntrace.rewriting import RewriteRule
from dyntrace.scheduler import (OUTER, AgentTest, ControlFlow, Fail, Query, Rewrite, Schedule,
                                Strengthen, Weaken, compile_to_mealy, run, step_as_exits)
from dyntrace.schema import ACSetBuilder, Var, homomorphisms, isomorphic
from dyntrace.trajectory import Trajectory

TOL = 1e-9  # weight tolerance for Dist comparisons and normalisation
KINDS = (MAYBE, LIST, DIST)


# ---------------------------------------------------------------------------
# 1, 2: the trap machines

def _shape(tree):
    """A deterministic behaviour tree as ``{(input, output): subtree}``."""
    out = {}
    for (port, _), e in tree.children:
        (o, sub), = e.values
        out[(port, o[0])] = _shape(sub)
    return out


def test_c01_trap_fidelity():
    with criterion(1, "trap transitions and depth-2 behaviour tree"):
        t0 = time.perf_counter()
        m = trap()
        for (s, a), (o, s2) in {("T", "U"): ("C", "T"), ("T", "A"): ("A", "N"),
                                ("N", "U"): ("U", "T"), ("N", "A"): ("U", "N")}.items():
            e = m.step(s, (a, None))
            assert not e.raised and e.values == ((s2, (o, None)),), (s, a, e)
        tree = behavior_tree(m, 2, [("U", None), ("A", None)])
        expected = {("U", "C"): {("U", "C"): {}, ("A", "A"): {}},
                    ("A", "A"): {("U", "U"): {}, ("A", "U"): {}}}
        assert _shape(tree) == expected
        assert tree.depth() == 2
        assert time.perf_counter() - t0 < 1.0


def test_c02_trap2_composite():
    with criterion(2, "Trap2 state space, initial state, A leaves second trap alone"):
        t0 = time.perf_counter()
        m = trap2()
        states = trap2_states()
        assert len(set(states)) == 4
        assert {trap2_components(s) for s in states} == {(a, b) for a in "TN" for b in "TN"}
        assert trap2_components(m.s0) == ("T", "T")
        tokens = [("U", None), ("A", None)]
        # every product state is a genuine state, and no two behave alike
        for i, s in enumerate(states):
            for a in tokens:
                assert not m.step(s, a).raised
            for s2 in states[i + 1:]:
                assert not behaviorally_equal(dataclasses.replace(m, s0=s),
                                              dataclasses.replace(m, s0=s2), 3, tokens)
        e = m.step(trap2_state("T", "T"), ("A", None))
        (s2, out), = e.values
        assert trap2_components(s2) == ("N", "T") and out == ("A", None)
        assert time.perf_counter() - t0 < 1.0


# ---------------------------------------------------------------------------
# 3: homomorphism search against enumeration

def _random_hom_case(rng):
    s = oracles.random_schema(rng, max_tables=4)
    X = oracles.random_instance(rng, s, max_parts=4)
    if rng.random() < 0.5 and X.total_parts():
        keep = oracles.random_subobject(rng, X, p_keep=0.4)
        while sum(map(len, keep.values())) > 5:
            t = rng.choice([t for t in keep if keep[t]])
            keep[t] = keep[t][:-1]
            keep = oracles.close_under_homs(X, keep)
            if sum(map(len, keep.values())) > 5:
                keep = {t: [] for t in keep}
        A = oracles.sub_instance(X, keep, var_attrs=rng.random() < 0.5)
    else:
        A = oracles.random_instance(rng, s, max_parts=4, p_var=0.4, total_cap=5)
    return A, X


def test_c03_homomorphism_oracle():
    with criterion(3, "homomorphisms() equals exhaustive enumeration on 200 cases"):
        t0 = time.perf_counter()
        rng = random.Random(3)
        nonempty = 0
        for i in range(200):
            A, X = _random_hom_case(rng)
            monic = i % 2 == 1
            got = {oracles.hom_key(f.components, f.assignment)
                   for f in homomorphisms(A, X, monic=monic)}
            want = {oracles.hom_key(c, a) for c, a in oracles.brute_homs(A, X, monic=monic)}
            assert got == want, f"case {i}: {len(got)} vs {len(want)}"
            nonempty += bool(want)
        assert nonempty >= 50  # the sample is not dominated by trivial cases
        assert time.perf_counter() - t0 < 60.0


# ---------------------------------------------------------------------------
# 4: pushouts and pushout complements

def _small_schema(rng):
    while True:
        s = oracles.random_schema(rng, max_tables=2)
        if len(s.homs) <= 2:
            return s


MAX_TARGETS = 5000  # cocone targets the brute-force universal-property check may enumerate


def _targets(s, X, Y):
    """Number of instances verify_pushout enumerates for this span (upper bound)."""
    import itertools
    vals = {}
    for a, _, ty in s.attrs:
        vals.setdefault(ty, set()).update(repr(v) for v in X.attr(a) + Y.attr(a))
    pool = {ty: len(v) + 2 for ty, v in vals.items()}
    bounds = {t: max(X.nparts(t) + Y.nparts(t), 1) for t in s.tables}
    total = 0
    for counts in itertools.product(*(range(bounds[t] + 1) for t in s.tables)):
        c = dict(zip(s.tables, counts))
        n = 1
        for _, src, tgt in s.homs:
            n *= c[tgt] ** c[src]
        for _, src, ty in s.attrs:
            n *= pool[ty] ** c[src]
        total += n
    return total


def _random_span(rng):
    along_var = rng.random() < 0.5  # half the cases glue along a variable
    while True:
        s = _small_schema(rng)
        K = oracles.random_instance(rng, s, max_parts=1, p_var=0.5)
        if along_var and not (s.attrs and K.vars()):
            continue
        X = oracles.random_instance(rng, s, max_parts=2)
        Y = oracles.random_instance(rng, s, max_parts=2)
        bounds = sum(max(X.nparts(t) + Y.nparts(t), 1) for t in s.tables)
        if bounds > 5 or _targets(s, X, Y) > MAX_TARGETS:
            continue
        fs, gs = oracles.brute_homs(K, X), oracles.brute_homs(K, Y)
        if fs and gs:
            return s, K, X, Y, rng.choice(fs)[0], rng.choice(gs)[0]


def _dpo_case(rng):
    need_homs = rng.random() < 0.6  # dangling needs a hom into a deleted part
    while True:
        s = oracles.random_schema(rng, max_tables=3)
        if need_homs and not s.homs:
            continue
        X = oracles.random_instance(rng, s, max_parts=3)
        if not 1 <= X.total_parts() <= 7:
            continue
        keepL = oracles.random_subobject(rng, X, p_keep=0.4)
        L = oracles.sub_instance(X, keepL)
        m_comps = {t: list(keepL[t]) for t in s.tables}
        if rng.random() < 0.4:  # often a non-monic match
            pairs = [(t, p) for t in s.tables for p in range(L.nparts(t))]
            if pairs:
                t, p = rng.choice(pairs)
                alts = [x for x in range(X.nparts(t)) if x != m_comps[t][p]]
                if alts:
                    m_comps[t][p] = rng.choice(alts)
        m = [c for c, _ in oracles.brute_homs(L, X) if c == {t: tuple(v) for t, v in m_comps.items()}]
        if not m:
            continue
        keepK = oracles.random_subobject(rng, L, p_keep=0.3)
        K = oracles.sub_instance(L, keepK)
        return s, K, L, X, {t: tuple(keepK[t]) for t in s.tables}, m[0]


def test_c04_pushout_and_complement_oracle():
    with criterion(4, "100 pushouts verified; complements rebuild X; rejection iff none exists"):
        t0 = time.perf_counter()
        rng = random.Random(4)
        conflicts = verified = 0
        while verified < 100:
            s, K, X, Y, fc, gc = _random_span(rng)
            f, g = hom(K, X, **fc), hom(K, Y, **gc)
            want = oracles.naive_pushout_acset(K, X, Y, fc, gc)
            if want is None:
                # clashing constants: no pushout exists, so the rejection is checked instead
                conflicts += 1
                with pytest.raises(AttributeConflict):
                    pushout(f, g)
                continue
            P, px, py = pushout(f, g)
            assert isomorphic(P, want), f"pushout {verified}"
            assert verify_pushout(f, g, P, px, py, budget=10), f"universal property {verified}"
            verified += 1
        assert conflicts >= 10, conflicts

        rejected = accepted = 0
        for i in range(100):
            # every third case is drawn until the oracle finds no complement
            while True:
                s, K, L, X, lc, mc = _dpo_case(rng)
                brute = oracles.brute_complement(lc, K, L, mc, X)
                if (not brute) == (i % 3 == 0):
                    break
            l, m = hom(K, L, **lc), hom(L, X, **mc)
            try:
                k, d = pushout_complement(l, m)
            except GluingViolation:
                rejected += 1
                assert not brute, f"complement {i} rejected but one exists"
                continue
            accepted += 1
            assert brute, f"complement {i} built but none exists"
            X2, _, _ = pushout(l, k)
            assert isomorphic(X2, X), f"pushout of the complement {i} is not X"
            assert d.dom.counts in [{t: len(D[t]) for t in s.tables} for D in brute]
        assert rejected == 34 and accepted == 66, (rejected, accepted)
        assert time.perf_counter() - t0 < 60.0


# ---------------------------------------------------------------------------
# 5: category and coproduct laws of machines

def _law_cases(rng, kind):
    A, B, C, D = ("a0", "a1"), ("b0", "b1"), ("c0", "c1"), ("d0",)

    def rm(i, o):
        return random_machine(rng, kind, i, o, nstates=rng.randint(1, 3))
    f, g, h = rm(A, B), rm(B, C), rm(C, D)
    f2, g2 = rm(B, C), rm(D, A)
    k1, k2 = rm(A, C), rm(B, C)
    idA, idB = structural("identity", kind, A), structural("identity", kind, B)
    return {
        "associativity": (compose(compose(f, g), h), compose(f, compose(g, h))),
        "left unit": (compose(idA, f), f),
        "right unit": (compose(f, idB), f),
        "tensor functoriality": (compose(tensor(f, h), tensor(f2, g2)),
                                 tensor(compose(f, f2), compose(h, g2))),
        "tensor of identities": (tensor(idA, idB),
                                 structural("identity", kind, _tag(0, A) + _tag(1, B))),
        "first injection": (compose(structural("injection", kind, A, B, side=0), copair(k1, k2)),
                            k1),
        "second injection": (compose(structural("injection", kind, A, B, side=1), copair(k1, k2)),
                             k2),
    }


def test_c05_category_and_coproduct_laws():
    with criterion(5, "category/coproduct laws at depth 6, 100 machines per law and kind"):
        failures = []
        for kind in KINDS:
            for i in range(100):
                rng = random.Random(f"laws-{kind.value}-{i}")
                for law, (lhs, rhs) in _law_cases(rng, kind).items():
                    if not behaviorally_equal(lhs, rhs, 6, tol=TOL):
                        failures.append((kind.value, i, law))
        assert not failures, failures[:5]


# ---------------------------------------------------------------------------
# 6: traced-axiom probes

PROBE_DEPTH, PROBE_FUEL = 5, 50


def relabel(m: MealyMachine, f) -> MealyMachine:
    """Rename every port of ``m`` through the bijection ``f``."""
    inv = {f(p): p for p in m.inputs}

    def step(s, tok):
        return fmap(m.step(s, (inv[tok[0]], tok[1])), lambda r: (r[0], (f(r[1][0]), r[1][1])))
    return MealyMachine(tuple(map(f, m.inputs)), tuple(map(f, m.outputs)), m.s0, step, m.kind,
                        m.name)


def _tag(t, xs):
    return [(t, x) for x in xs]


A_, B_, C_, D_, U_, V_ = ["a0", "a1"], ["b0", "b1"], ["c0"], ["d0"], ["u0", "u1"], ["v0"]


def _yanking(rng, kind, n, fuel):
    u = U_[:rng.randint(1, 2)]
    return trace(structural("symmetry", kind, u, u), fuel), structural("identity", kind, u)


def _tightening(rng, kind, n, fuel):
    f = random_machine(rng, kind, _tag(0, A_) + _tag(1, U_), _tag(0, B_) + _tag(1, U_), n)
    g = random_machine(rng, kind, C_, A_, n)
    h = random_machine(rng, kind, B_, D_, n)
    iu = structural("identity", kind, U_)
    lhs = trace(compose(compose(tensor(g, iu), f), tensor(h, iu)), fuel)
    return lhs, compose(compose(g, trace(f, fuel)), h)


def _sliding(rng, kind, n, fuel):
    f = random_machine(rng, kind, _tag(0, A_) + _tag(1, U_), _tag(0, B_) + _tag(1, V_), n)
    k = random_machine(rng, kind, V_, U_, n)
    lhs = trace(compose(f, tensor(structural("identity", kind, B_), k)), fuel)
    rhs = trace(compose(tensor(structural("identity", kind, A_), k), f), fuel)
    return lhs, rhs


def _vanishing_unit(rng, kind, n, fuel):
    f = random_machine(rng, kind, A_, B_, n)
    return trace(relabel(f, lambda p: (0, p)), fuel), f


def _assoc_uv(p):
    """``A + (U + V)`` to ``(A + U) + V``."""
    if p[0] == 0:
        return (0, (0, p[1]))
    if p[1][0] == 0:
        return (0, (1, p[1][1]))
    return (1, p[1][1])


def _vanishing(rng, kind, n, fuel):
    uv = _tag(0, U_) + _tag(1, V_)
    f = random_machine(rng, kind, _tag(0, A_) + _tag(1, uv), _tag(0, B_) + _tag(1, uv), n)
    return trace(f, fuel), trace(trace(relabel(f, _assoc_uv), fuel), fuel)


def _superposing(rng, kind, n, fuel):
    f = random_machine(rng, kind, _tag(0, A_) + _tag(1, U_), _tag(0, B_) + _tag(1, U_), n)
    g = random_machine(rng, kind, C_, D_, n)

    def beta(p):  # (A + U) + C  to  (A + C) + U
        if p[0] == 1:
            return (0, (1, p[1]))
        if p[1][0] == 0:
            return (0, (0, p[1][1]))
        return (1, p[1][1])
    return tensor(trace(f, fuel), g), trace(relabel(tensor(f, g), beta), fuel)


AXIOMS = {"yanking": _yanking, "tightening": _tightening, "sliding": _sliding,
          "vanishing (unit)": _vanishing_unit, "vanishing (U+V)": _vanishing,
          "superposing": _superposing}


def _first_difference(lhs, rhs, depth):
    for d in range(1, depth + 1):
        if not behaviorally_equal(lhs, rhs, d, tol=TOL):
            return d
    return None


def minimize(law, kind, depth=PROBE_DEPTH, fuel=PROBE_FUEL, tries=200):
    """Smallest failing random instance: fewest states first, then shallowest."""
    for n in (1, 2, 3):
        best = None
        for seed in range(tries):
            lhs, rhs = law(random.Random(seed), kind, n, fuel)
            d = _first_difference(lhs, rhs, depth)
            if d is not None and (best is None or d < best[1]):
                best = (seed, d)
        if best:
            return f"nstates={n} seed={best[0]} differs at depth {best[1]}"
    return None


def counter_machine(kind, nu: int, nv: int) -> MealyMachine:
    """Feeds back ``nu`` times through U, then ``nv`` times through V, then exits."""
    ins = _tag(0, ["a"]) + _tag(1, _tag(0, ["u"]) + _tag(1, ["v"]))
    outs = _tag(0, ["b"]) + _tag(1, _tag(0, ["u"]) + _tag(1, ["v"]))

    def step(i, tok):
        if i < nu:
            port = (1, (0, "u"))
        elif i < nu + nv:
            port = (1, (1, "v"))
        else:
            return pure(kind, (0, ((0, "b"), tok[1])))
        return pure(kind, (i + 1, (port, tok[1])))
    return MealyMachine(ins, outs, 0, step, kind, f"count{nu},{nv}")


def fuel_boundary_counterexample(kind):
    """Smallest (fuel, U loops, V loops) where single and nested traces disagree."""
    for fuel in range(1, 4):
        for total in range(0, 8):
            for nu in range(total + 1):
                m = counter_machine(kind, nu, total - nu)
                lhs, rhs = trace(m, fuel), trace(trace(relabel(m, _assoc_uv), fuel), fuel)
                if not behaviorally_equal(lhs, rhs, 1, tol=TOL):
                    return fuel, nu, total - nu
    return None


def test_c06_traced_axiom_probes():
    with criterion(6, "traced-axiom probes run to completion; yanking holds"):
        rows, findings = [], {}
        for name, law in AXIOMS.items():
            cells = []
            for kind in KINDS:
                bad = 0
                for i in range(100):
                    rng = random.Random(f"{name}-{kind.value}-{i}")
                    lhs, rhs = law(rng, kind, rng.randint(1, 3), PROBE_FUEL)
                    bad += not behaviorally_equal(lhs, rhs, PROBE_DEPTH, tol=TOL)
                cells.append(f"{kind.value}:{'pass' if not bad else f'FAIL {bad}/100'}")
                if bad:
                    findings[(name, kind.value)] = minimize(law, kind)
            rows.append(f"{name:<34} " + "  ".join(cells))
        boundary = []
        for kind in KINDS:
            cx = fuel_boundary_counterexample(kind)
            boundary.append(f"{kind.value}:{'pass' if cx is None else 'FAIL'}")
            if cx is not None:
                findings[("vanishing (U+V) at fuel limit", kind.value)] = \
                    "fuel={} with {} U then {} V feedbacks".format(*cx)
        rows.append(f"{'vanishing (U+V), hand-built':<34} " + "  ".join(boundary))
        TABLES.clear()
        TABLES.append(f"depth {PROBE_DEPTH}, fuel {PROBE_FUEL}, 100 random machines per cell")
        TABLES.extend(rows)
        for (name, kind), cx in sorted(findings.items()):
            TABLES.append(f"finding: {name} / {kind}: {cx}")
        print("\n".join(TABLES))
        assert len(rows) == len(AXIOMS) + 1
        assert rows[0].count("pass") == 3, rows[0]  # yanking
        assert all(cx for cx in findings.values())  # every failure has a counterexample


# ---------------------------------------------------------------------------
# 7: Query box

def _name_of_agent(traj):
    return traj.last().attr("name")[traj.agent["V"][0]]


def _query_program(seen):
    V1 = graph(1, schema=NAMED)
    L = graph(2, [(0, 1)], NAMED)
    rule = RewriteRule.build(L, V1, V1, {"V": [0]}, {"V": [0]}, agent_in=(V1, {"V": [0]}),
                             agent_out=(V1, {"V": [0]}), name="drop_out_neighbour")

    def record(traj):
        seen.append(_name_of_agent(traj))
        return 1
    boxes = {"q": Query(V1, V1, V1), "rec": ControlFlow(V1, 1, predicate=record),
             "rw": Rewrite(rule)}
    wires = [((OUTER, "in"), ("q", "A")), (("q", "B"), ("rec", "in")), (("rec", "1"), ("rw", "in")),
             (("rw", "success"), ("q", "C")), (("rw", "fail"), ("q", "C")),
             (("q", "A"), (OUTER, "A")), (("q", "0"), (OUTER, "zero"))]
    return Schedule(boxes, wires, {"in": V1}, {"A": V1, "zero": initial_acset(NAMED)}, "query")


def test_c07_query_semantics():
    with criterion(7, "Query emits surviving B agents, then A iff the original survives"):
        t0 = time.perf_counter()
        world = graph(3, [(0, 1)], NAMED, names=["x", "y", "z"])
        V1 = graph(1, schema=NAMED)
        # by hand: queue x, y, z; x deletes y; y is dropped; z has no out-edge
        expected = {"x": ("A", "x"), "y": ("zero", None), "z": ("A", "z")}
        for v, name in enumerate(["x", "y", "z"]):
            seen = []
            s = _query_program(seen)
            t = Trajectory(world, hom(V1, world, V=[v]))
            res = run(s, t, MAYBE)
            (ex,) = res.effect.values
            assert seen == ["x", "z"], (name, seen)
            qport = {"A": "A", "zero": "0"}[expected[name][0]]
            assert res.report.tally["q"] == {"B": 2, qport: 1}
            assert ex.port == expected[name][0]
            if ex.port == "A":
                assert _name_of_agent(ex.trajectory) == expected[name][1]
            assert sorted(ex.trajectory.last().attr("name")) == ["x", "z"]
        assert time.perf_counter() - t0 < 1.0


# ---------------------------------------------------------------------------
# 8: rewrite the first agent satisfying a property

def _agent_loop_program():
    E2 = graph(2, [(0, 1)], NAMED)
    V1 = graph(1, schema=NAMED)
    zero = initial_acset(NAMED)
    rule = RewriteRule.build(E2, V1, V1, {"V": [0]}, {"V": [0]},
                             agent_in=(E2, {"V": [0, 1], "E": [0]}), agent_out=(V1, {"V": [0]}),
                             name="delete_target")
    boxes = {"q": Query(zero, E2, E2),
             "phi": ControlFlow(E2, 2, predicate=AgentTest("v1 == 't'")),
             "rw": Rewrite(rule), "forget": Weaken(initial_morphism(V1))}
    wires = [((OUTER, "in"), ("q", "A")), (("q", "B"), ("phi", "in")),
             (("phi", "1"), ("rw", "in")), (("phi", "2"), ("q", "C")),
             (("rw", "success"), ("forget", "in")), (("rw", "fail"), ("q", "C")),
             (("forget", "out"), (OUTER, "out")), (("q", "A"), (OUTER, "out")),
             (("q", "0"), (OUTER, "out"))]
    return Schedule(boxes, wires, {"in": zero}, {"out": zero}, "rewrite_one")


def test_c08_rewrite_first_satisfying_agent():
    with criterion(8, "agent-loop program: one rewrite with one candidate, none without"):
        t0 = time.perf_counter()
        s = _agent_loop_program()
        names = ["c", "t", "e", "a", "t", "g"]
        # a->t is the only deletable target named t; the edges into the first t dangle,
        # and the query meets them first
        one = graph(6, [(0, 1), (2, 1), (3, 4), (5, 3)], NAMED, names=names)
        res = run(s, Trajectory(one), MAYBE)
        (ex,) = res.effect.values
        assert ex.port == "out" and ex.trajectory.agent.dom.total_parts() == 0
        assert res.report.count("rw", "success") == 1
        assert res.report.count("rw", "fail") >= 1  # the dangling candidates were tried
        out = ex.trajectory.last()
        assert out.counts == {"V": 5, "E": 3}
        assert sorted(out.attr("name")) == ["a", "c", "e", "g", "t"]

        none = graph(6, [(0, 1), (2, 1), (5, 3)], NAMED, names=names)
        res = run(s, Trajectory(none), MAYBE)
        (ex,) = res.effect.values
        assert res.report.count("rw", "success") == 0
        assert res.report.count("q", "A") == 1
        assert isomorphic(ex.trajectory.last(), none)
        assert time.perf_counter() - t0 < 1.0


# ---------------------------------------------------------------------------
# 9: interpreter against the compiled machine

def _c9_pieces():
    V1 = graph(1)
    zero = initial_acset(GRAPH)
    loop = graph(1, [(0, 0)])
    E2 = graph(2, [(0, 1)])
    V2 = graph(2)
    ident = {"V": [0]}
    rules = [
        RewriteRule.build(V1, V1, loop, ident, ident, agent_in=(V1, ident),
                          agent_out=(V1, ident), name="add_loop"),
        RewriteRule.build(loop, V1, V1, ident, ident, agent_in=(V1, ident),
                          agent_out=(V1, ident), name="drop_loop"),
        RewriteRule.build(E2, V2, V2, {"V": [0, 1]}, {"V": [0, 1]}, name="drop_edge"),
        RewriteRule.build(zero, zero, V1, {}, {}, agent_out=(V1, ident), name="add_vertex"),
        RewriteRule.build(V1, zero, zero, {}, {}, agent_in=(V1, ident), name="drop_vertex"),
    ]
    return V1, zero, rules


def random_schedule(rng):
    V1, zero, rules = _c9_pieces()
    shapes = {"0": zero, "V": V1}

    def shape_key(x):
        return "0" if x.total_parts() == 0 else "V"
    inputs = {f"i{j}": shapes[rng.choice("0V")] for j in range(rng.randint(1, 2))}
    open_ = [((OUTER, p), shape_key(x)) for p, x in inputs.items()]
    boxes, wires = {}, []
    for b in range(rng.randint(1, 5)):
        name = f"b{b}"
        have = {k for _, k in open_}
        if not have:
            break
        menu = []
        for r in rules:
            if shape_key(r.A) in have:
                menu.append(Rewrite(r))
        if "V" in have:
            menu += [Weaken(initial_morphism(V1)), Fail(V1, rng.choice(["exception", "empty"]))]
        if "0" in have:
            menu.append(Strengthen(initial_morphism(V1)))
        for k in have:
            n = rng.randint(2, 3)
            menu.append(ControlFlow(shapes[k], n, weights=[rng.choice([0.0, 1.0, 2.0, 0.5])
                                                           for _ in range(n - 1)] + [1.0]))
            menu.append(Query(shapes[k], V1, V1))
        g = rng.choice(menu)
        boxes[name] = g
        for port, shape in g.in_ports().items():
            k = shape_key(shape)
            feeds = [o for o in open_ if o[1] == k]
            if not feeds or (port == "C" and rng.random() < 0.7):
                continue
            rng.shuffle(feeds)
            for src, _ in feeds[:rng.randint(1, min(2, len(feeds)))]:
                wires.append((src, (name, port)))
                open_.remove((src, k))
        open_ += [((name, p), shape_key(x)) for p, x in g.out_ports().items()]
    outputs = {}
    for src, k in open_:
        port = f"o{k}" if rng.random() < 0.5 else f"o{len(outputs)}{k}"
        outputs[port] = shapes[k]
        wires.append((src, (OUTER, port)))
    return Schedule(boxes, wires, inputs, outputs, "random")


def _exits_equal(x, y):
    if x.port != y.port or x.trajectory.length() != y.trajectory.length():
        return False
    return all(w1 == w2 and a1 == a2 for (w1, a1), (w2, a2) in zip(x.trajectory, y.trajectory))


def _random_start(rng, shape):
    X = graph(3, [(0, 0), (0, 1), (2, 1)][:rng.randint(0, 3)])
    if shape.total_parts() == 0:
        return Trajectory(X)
    return Trajectory(X, hom(shape, X, V=[rng.randrange(3)]))


def test_c09_run_matches_compiled_machine():
    with criterion(9, "run() equals one step of compile_to_mealy on 50 schedules x 3 kinds"):
        rng = random.Random(9)
        checked = 0
        for i in range(50):
            s = random_schedule(rng)
            port = rng.choice(sorted(s.inputs))
            t = _random_start(rng, s.inputs[port])
            for kind in KINDS:
                outcome = []
                for attempt in ("run", "compiled"):
                    try:
                        if attempt == "run":
                            outcome.append(run(s, t, kind, seed=i, in_port=port).effect)
                        else:
                            m = compile_to_mealy(s, kind, seed=i)
                            outcome.append(step_as_exits(m, t, port))
                    except Exception as e:  # both sides must fail the same way
                        outcome.append(type(e))
                a, b = outcome
                if isinstance(a, type) or isinstance(b, type):
                    assert a is b, (i, kind, a, b)
                    continue
                assert effects_equal(a, b, _exits_equal, TOL), (i, kind.value, a, b)
                checked += 1
        assert checked >= 120


# ---------------------------------------------------------------------------
# 10: wolf-sheep end to end

def _cli(*args, timeout=120):
    env = dict(os.environ, PYTHONHASHSEED="0")
    return subprocess.run([sys.executable, "-m", "dyntrace.cli", *args], capture_output=True,
                          env=env, timeout=timeout)


def _hand_written_wolf_move():
    from dyntrace.wolfsheep import SCHEMA

    def pat(grass, with_wolf, wolf_at, eng):
        b = ACSetBuilder(SCHEMA)
        b.add_part("V", grass=Var(0))
        b.add_part("V", grass=Var(3))
        b.add_part("E", src=0, tgt=1, dir=Var(2))
        if with_wolf:
            b.add_part("Wolf", w_pos=wolf_at, w_eng=eng, w_dir=Var(2))
        return b.build()
    L, K, R = pat(0, True, 0, Var(1)), pat(0, False, 0, None), pat(0, True, 1, Var(4))
    A = ACSetBuilder(SCHEMA)
    A.add_part("V", grass=Var(0))
    A.add_part("Wolf", w_pos=0, w_eng=Var(1), w_dir=Var(2))
    A = A.build()
    kl = {"V": [0, 1], "E": [0]}
    return RewriteRule.build(L, K, R, kl, kl, agent_in=(A, {"V": [0], "Wolf": [0]}),
                             agent_out=(A, {"V": [1], "Wolf": [0]}),
                             exprs={("w_eng", 0): "v1 - 1"})


def test_c10_wolf_sheep_end_to_end(tmp_path):
    with criterion(10, "wolf-sheep via CLI: 100 steps < 30 s, invariants, reproducible, Swap"):
        import json

        from dyntrace.wolfsheep import SHEEP, SWAP, WOLF, Params, shared_rules
        outs = []
        for j in range(2):
            path = tmp_path / f"run{j}.json"
            t0 = time.perf_counter()
            proc = _cli("example", "wolf-sheep", "--steps", "100", "--seed", "1", "--out",
                        str(path))
            elapsed = time.perf_counter() - t0
            assert proc.returncode == 0, proc.stderr.decode()
            assert elapsed < 30.0, elapsed
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
        report = json.loads(outs[0])
        recs = report["records"]
        assert len(recs) == 101 and [r["step"] for r in recs] == list(range(101))
        for prev, r in zip(recs, recs[1:]):
            assert r["violations"] == [] and "exception" not in r
            assert r["sheep"] >= 0 and r["wolves"] >= 0 and 0 <= r["grown"] <= 100
            births = r["rules"].get("sheep.reproduce", 0)
            deaths = r["rules"].get("sheep.starve", 0) + r["rules"].get("wolves.eat", 0)
            assert r["sheep"] == prev["sheep"] + births - deaths
        p = Params()
        sheep, wolf = shared_rules(SHEEP, p), shared_rules(WOLF, p)
        assert sheep.keys() == wolf.keys()
        for name, rule in sheep.items():
            assert delta_migrate_rule(SWAP, rule) == wolf[name], name
        assert delta_migrate_rule(SWAP, sheep["move"]) == _hand_written_wolf_move()


# ---------------------------------------------------------------------------
# 11: monad laws and exception absorption

def _random_effect(rng, kind, values=range(5), p_exc=0.1):
    if rng.random() < p_exc:
        return throw(kind)
    if kind is MAYBE:
        return pure(kind, rng.choice(values))
    n = rng.randint(0 if kind is LIST else 1, 3)
    xs = [rng.choice(values) for _ in range(n)]
    if kind is LIST:
        return from_list(xs)
    return dist([(rng.uniform(0.01, 1.0), x) for x in xs], normalize=True)


def _random_kleisli(rng, kind):
    table = {x: _random_effect(rng, kind) for x in range(5)}
    return lambda x: table[x]


def _normalized(e):
    if e.kind is not DIST or e.raised:
        return True
    return all(w >= 0 for w in e.weights) and abs(math.fsum(e.weights) - 1.0) <= TOL


def test_c11_effect_laws():
    with criterion(11, "monad laws and exception absorption, 1000 cases per kind"):
        for kind in KINDS:
            rng = random.Random(f"monad-{kind.value}")
            for i in range(1000):
                m = _random_effect(rng, kind)
                f, g = _random_kleisli(rng, kind), _random_kleisli(rng, kind)
                x = rng.randrange(5)
                results = [bind(pure(kind, x), f), bind(m, lambda y: pure(kind, y)),
                           bind(bind(m, f), g), bind(m, lambda y: bind(f(y), g))]
                assert effects_equal(results[0], f(x), tol=TOL), (kind, i, "left unit")
                assert effects_equal(results[1], m, tol=TOL), (kind, i, "right unit")
                assert effects_equal(results[2], results[3], tol=TOL), (kind, i, "assoc")
                assert oracles.matches_expected(bind(m, f), oracles.expected_bind(m, f), TOL), \
                    (kind, i, "bind")
                assert bind(throw(kind), f).raised
                if not m.raised and any(f(y).raised for _, y in m.branches()):
                    assert bind(m, f).raised, (kind, i, "absorption")
                assert all(_normalized(e) for e in results + [m]), (kind, i, "normalisation")
