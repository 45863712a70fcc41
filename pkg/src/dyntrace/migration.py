"""Delta data migration along schema functors.

A functor ``F: S -> T`` sends generators to generators.  Pulling back
along ``F`` turns ``T``-instances into ``S``-instances (each ``S`` table
reads the data of its image), and the same relabelling applies to
morphisms, rules and whole schedules.  Only Delta is provided; the left
adjoint (Sigma) is not implemented.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional

from .colimits import PartialMap
from .rewriting import RewriteRule
from .scheduler import (AgentTest, ControlFlow, Fail, Init, Query, Rewrite, Schedule, Strengthen, Weaken)
from .schema import ACSet, ACSetMorphism, Schema


class MigrationError(ValueError):
    pass


@dataclass(frozen=True)
class SchemaFunctor:
    """``ob`` maps tables and attribute types; ``hom`` / ``attr`` map generators."""

    source: Schema
    target: Schema
    ob: Mapping[str, str]
    hom: Mapping[str, str] = field(default_factory=dict)
    attr: Mapping[str, str] = field(default_factory=dict)

    def violations(self) -> List[str]:
        S, T = self.source, self.target
        out = []
        for t in S.tables:
            if t not in self.ob:
                out.append(f"table {t!r} is not mapped")
            elif self.ob[t] not in T.tables:
                out.append(f"table {t!r} maps to {self.ob[t]!r}, not a table")
        tkinds = dict(T.attr_types)
        for name, kind in S.attr_types:
            img = self.ob.get(name)
            if img is None:
                out.append(f"attribute type {name!r} is not mapped")
            elif img not in tkinds:
                out.append(f"attribute type {name!r} maps to {img!r}, not an attribute type")
            elif tkinds[img] != kind:
                out.append(f"attribute type {name!r} changes kind ({kind} -> {tkinds[img]})")
        for h, src, tgt in S.homs:
            img = self.hom.get(h)
            if img is None:
                out.append(f"hom {h!r} is not mapped")
            elif img not in T.hom_names:
                out.append(f"hom {h!r} maps to unknown {img!r}")
            elif (T.hom_src[img], T.hom_tgt[img]) != (self.ob.get(src), self.ob.get(tgt)):
                out.append(f"hom {h!r} maps to {img!r} with incompatible endpoints")
        for a, src, typ in S.attrs:
            img = self.attr.get(a)
            if img is None:
                out.append(f"attribute {a!r} is not mapped")
            elif img not in T.attr_names:
                out.append(f"attribute {a!r} maps to unknown {img!r}")
            elif (T.attr_src[img], T.attr_type[img]) != (self.ob.get(src), self.ob.get(typ)):
                out.append(f"attribute {a!r} maps to {img!r} with incompatible endpoints")
        return out

    def check(self):
        problems = self.violations()
        if problems:
            raise MigrationError("; ".join(problems))


def identity_functor(s: Schema) -> SchemaFunctor:
    return SchemaFunctor(s, s, {x: x for x in list(s.tables) + [n for n, _ in s.attr_types]},
                         {h: h for h in s.hom_names}, {a: a for a in s.attr_names})


def compose_functors(F: SchemaFunctor, G: SchemaFunctor) -> SchemaFunctor:
    """Diagrammatic ``F ; G``."""
    if F.target != G.source:
        raise MigrationError("functors do not compose")
    return SchemaFunctor(F.source, G.target, {k: G.ob[v] for k, v in F.ob.items()},
                         {k: G.hom[v] for k, v in F.hom.items()},
                         {k: G.attr[v] for k, v in F.attr.items()})


def delta_migrate(F: SchemaFunctor, X: ACSet) -> ACSet:
    if X.schema != F.target:
        raise MigrationError("instance is not over the functor's target schema")
    F.check()
    S = F.source
    return ACSet(S, {t: X.nparts(F.ob[t]) for t in S.tables},
                 {h: X.hom(F.hom[h]) for h in S.hom_names},
                 {a: X.attr(F.attr[a]) for a in S.attr_names}, check=False)


def delta_migrate_morphism(F: SchemaFunctor, f: ACSetMorphism) -> ACSetMorphism:
    dom, cod = delta_migrate(F, f.dom), delta_migrate(F, f.cod)
    comps = {t: f.components[F.ob[t]] for t in F.source.tables}
    return ACSetMorphism(dom, cod, comps, {v: f.assignment[v] for v in dom.vars()
                                           if v in f.assignment})


def delta_migrate_partial(F: SchemaFunctor, p: PartialMap) -> PartialMap:
    dom, cod = delta_migrate(F, p.dom), delta_migrate(F, p.cod)
    comps = {t: p.components[F.ob[t]] for t in F.source.tables}
    return PartialMap(dom, cod, comps, {v: p.assignment[v] for v in dom.vars()
                                        if v in p.assignment})


def delta_migrate_rule(F: SchemaFunctor, rule: RewriteRule) -> RewriteRule:
    exprs = {}
    for a in F.source.attr_names:
        img = F.attr[a]
        for (b, q), e in rule.exprs.items():
            if b == img:
                exprs[(a, q)] = e
    dm = lambda f: delta_migrate_morphism(F, f)  # noqa: E731
    return RewriteRule(dm(rule.l), dm(rule.r), dm(rule.agent_in), dm(rule.agent_out), exprs,
                       rule.semantics, rule.monic, rule.name)


def delta_migrate_schedule(F: SchemaFunctor, s: Schedule,
                           predicate_map: Optional[Mapping[str, Callable]] = None) -> Schedule:
    """Migrate every shape, map and rule inside ``s``.

    Predicates of ControlFlow boxes inspect trajectories over the old
    schema, so they must be replaced through ``predicate_map`` (box name
    to new predicate).
    """
    predicate_map = dict(predicate_map or {})
    dA = lambda X: delta_migrate(F, X)  # noqa: E731
    dm = lambda f: delta_migrate_morphism(F, f)  # noqa: E731
    boxes = {}
    for name, g in s.boxes.items():
        if isinstance(g, Rewrite):
            boxes[name] = Rewrite(delta_migrate_rule(F, g.rule))
        elif isinstance(g, Weaken):
            boxes[name] = Weaken(dm(g.f))
        elif isinstance(g, Strengthen):
            boxes[name] = Strengthen(dm(g.f))
        elif isinstance(g, Init):
            boxes[name] = Init(dm(g.a0), dA(g.in_shape))
        elif isinstance(g, Fail):
            boxes[name] = Fail(dA(g.shape), g.mode)
        elif isinstance(g, ControlFlow):
            pred = None
            if isinstance(g.predicate, AgentTest) and name not in predicate_map:
                pred = g.predicate  # reads agent variables, which migration keeps
            elif g.predicate is not None:
                if name not in predicate_map:
                    raise MigrationError(f"ControlFlow box {name!r} needs a migrated predicate")
                pred = predicate_map[name]
            boxes[name] = ControlFlow(dA(g.shape), g.n, g.weights, pred, g.label)
        elif isinstance(g, Query):
            boxes[name] = Query(dA(g.A), dA(g.B), dA(g.C))
        else:
            raise MigrationError(f"cannot migrate box {name!r}")
    return Schedule(boxes, list(s.wires), {p: dA(x) for p, x in s.inputs.items()},
                    {p: dA(x) for p, x in s.outputs.items()}, s.name)
