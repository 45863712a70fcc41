"""Colimits of ACSets and partial maps between them.

Pushouts are computed table by table as quotients of a disjoint union.
Attribute cells are merged by unification: a variable adopts whatever
concrete value it is glued to, two different concrete values are an error.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .schema import (ACSet, ACSetMorphism, Schema, SchemaError, Var, compose,
                     homomorphisms, infer_morphism, is_natural, same_value, value_key)


class AttributeConflict(ValueError):
    """Two distinct concrete attribute values were identified."""


class GluingViolation(ValueError):
    """No pushout complement exists for the given match.

    ``kind`` is ``"dangling"`` or ``"identification"``; ``parts`` lists the
    offending ``(table, part)`` pairs of the target.
    """

    def __init__(self, kind: str, parts):
        self.kind = kind
        self.parts = sorted(parts)
        super().__init__(f"{kind} violation at {self.parts}")


class NonMonicInterface(ValueError):
    """Pushout complements are only computed along monic ``K -> L``."""


class BudgetExceeded(RuntimeError):
    pass


def initial_acset(schema: Schema) -> ACSet:
    return ACSet(schema)


def initial_morphism(X: ACSet) -> ACSetMorphism:
    """The unique morphism from the empty instance into ``X``."""
    return ACSetMorphism(initial_acset(X.schema), X, {})


@lru_cache(maxsize=4096)
def range_tuple(n: int) -> Tuple[int, ...]:
    """Shared ``tuple(range(n))``; identity components reuse these objects."""
    return tuple(range(n))


def _is_range(col: Sequence, n: int) -> bool:
    if len(col) == n and col is range_tuple(n):
        return True
    return len(col) == n and (n == 0 or (col[0] == 0 and col[-1] == n - 1 and
                                         tuple(col) == tuple(range(n))))


# ---------------------------------------------------------------------------
# union-find helpers

class _UF:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent: Dict[Any, Any] = {}

    def find(self, x):
        parent = self.parent
        root = x
        while root in parent and parent[root] != root:
            root = parent[root]
        while x in parent and parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        # keep the smaller key as root so numbering is deterministic
        if _sort_key(rb) < _sort_key(ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.parent.setdefault(ra, ra)
        return ra


def _sort_key(node):
    return node if isinstance(node, int) else (0, repr(node))


class _Unifier:
    """Union-find over attribute value nodes with concrete-value tracking."""

    def __init__(self):
        self.uf = _UF()
        self.value: Dict[Any, Any] = {}

    @staticmethod
    def node(side: str, v):
        if isinstance(v, Var):
            return (side, v.id)
        return ("c",) + value_key(v)

    def unify(self, side_a, a, side_b, b):
        na, nb = self.node(side_a, a), self.node(side_b, b)
        if na[0] == "c":
            self.value.setdefault(na, a)
        if nb[0] == "c":
            self.value.setdefault(nb, b)
        ra, rb = self.uf.find(na), self.uf.find(nb)
        if ra == rb:
            return
        va, vb = self.value.get(ra, _NONE), self.value.get(rb, _NONE)
        if va is not _NONE and vb is not _NONE and not same_value(va, vb):
            raise AttributeConflict(f"cannot identify {va!r} with {vb!r}")
        root = self.uf.union(ra, rb)
        val = va if va is not _NONE else vb
        if val is not _NONE:
            self.value[root] = val

    def resolve(self, side, v, fresh: Dict[Any, Var]):
        n = self.node(side, v)
        if n[0] == "c":
            return v
        r = self.uf.find(n)
        val = self.value.get(r, _NONE)
        if val is not _NONE:
            return val
        return fresh[r]


_NONE = object()


def pushout(f: ACSetMorphism, g: ACSetMorphism) -> Tuple[ACSet, ACSetMorphism, ACSetMorphism]:
    """Pushout of the span ``X <-f- K -g-> Y``.

    Returns ``(P, px, py)``.  Parts of ``P`` are numbered by the first
    member of each class, scanning ``X`` then ``Y``; so an ``X`` that is not
    collapsed keeps its part ids.  Variables that stay free are renumbered
    from zero, ``X`` variables first.
    """
    K, X, Y = f.dom, f.cod, g.cod
    if g.dom is not K and g.dom != K:
        raise SchemaError("pushout legs must share their domain")
    if X.schema != Y.schema:
        raise SchemaError("schema mismatch")
    s = X.schema
    idx_x: Dict[str, List[int]] = {}
    idx_y: Dict[str, List[int]] = {}
    counts: Dict[str, int] = {}
    x_identity: Dict[str, bool] = {}
    for t in s.tables:
        nx, ny = X.nparts(t), Y.nparts(t)
        fc, gc = f.components[t], g.components[t]
        uf = _UF()
        for a, b in zip(fc, gc):
            uf.union(a, nx + b)
        touched_x = [x for x in uf.parent if x < nx]
        roots = {}
        merged = False
        for x in sorted(touched_x):
            r = uf.find(x)
            if r in roots:
                merged = True
            else:
                roots[r] = x
        if not merged:
            ix = list(range(nx))
            n = nx
            root_id = {r: x for r, x in roots.items()}
        else:
            ix = [0] * nx
            root_id = {}
            n = 0
            for x in range(nx):
                if x in uf.parent:
                    r = uf.find(x)
                    if r not in root_id:
                        root_id[r] = n
                        n += 1
                    ix[x] = root_id[r]
                else:
                    ix[x] = n
                    n += 1
        iy = [0] * ny
        for y in range(ny):
            node = nx + y
            if node in uf.parent:
                r = uf.find(node)
                if r not in root_id:
                    root_id[r] = n
                    n += 1
                iy[y] = root_id[r]
            else:
                iy[y] = n
                n += 1
        idx_x[t], idx_y[t], counts[t] = ix, iy, n
        x_identity[t] = not merged

    homs = {}
    for h, src, tgt in s.homs:
        n = counts[src]
        xh, yh = X.hom(h), Y.hom(h)
        if x_identity[src] and x_identity[tgt]:
            col = list(xh) + [0] * (n - len(xh))
        else:
            col = [0] * n
            ixs, ixt = idx_x[src], idx_x[tgt]
            for x, v in enumerate(xh):
                col[ixs[x]] = ixt[v]
        iys, iyt = idx_y[src], idx_y[tgt]
        for y, v in enumerate(yh):
            col[iys[y]] = iyt[v]
        homs[h] = col

    uni = _Unifier()
    for u in K.vars():
        uni.unify("x", f.subst(Var(u)), "y", g.subst(Var(u)))
    for a, src, _ in s.attrs:
        xa, ya = X.attr(a), Y.attr(a)
        for xp, yp in zip(f.components[src], g.components[src]):
            uni.unify("x", xa[xp], "y", ya[yp])
    fresh: Dict[Any, Var] = {}
    for side, obj in (("x", X), ("y", Y)):
        for v in obj.vars():
            r = uni.uf.find((side, v))
            if r not in fresh and uni.value.get(r, _NONE) is _NONE:
                fresh[r] = Var(len(fresh))
    x_ground = not X.vars()
    attrs = {}
    for a, src, _ in s.attrs:
        n = counts[src]
        xa, ya = X.attr(a), Y.attr(a)
        if x_ground:
            xs = xa
        else:
            xs = [uni.resolve("x", v, fresh) if isinstance(v, Var) else v for v in xa]
        if x_identity[src]:
            col = list(xs) + [None] * (n - len(xs))
        else:
            col = [None] * n
            ixs = idx_x[src]
            for x, v in enumerate(xs):
                col[ixs[x]] = v
        iys = idx_y[src]
        for y, v in enumerate(ya):
            col[iys[y]] = uni.resolve("y", v, fresh)
        attrs[a] = col
    P = ACSet(s, counts, homs, attrs, check=False)
    px = ACSetMorphism(X, P, idx_x, {v: uni.resolve("x", Var(v), fresh) for v in X.vars()})
    py = ACSetMorphism(Y, P, idx_y, {v: uni.resolve("y", Var(v), fresh) for v in Y.vars()})
    return P, px, py


def coproduct(X: ACSet, Y: ACSet) -> Tuple[ACSet, ACSetMorphism, ACSetMorphism]:
    """Disjoint union with its two injections (a pushout over the empty instance)."""
    if X.schema != Y.schema:
        raise SchemaError("schema mismatch")
    return pushout(initial_morphism(X), initial_morphism(Y))


def copair(f: ACSetMorphism, g: ACSetMorphism, i1: ACSetMorphism, i2: ACSetMorphism) -> ACSetMorphism:
    """The mediating map ``X + Y -> Z`` out of a coproduct built by :func:`coproduct`."""
    XY = i1.cod
    comps = {}
    for t in XY.schema.tables:
        col = [None] * XY.nparts(t)
        for p, q in enumerate(i1.components[t]):
            col[q] = f.components[t][p]
        for p, q in enumerate(i2.components[t]):
            col[q] = g.components[t][p]
        comps[t] = col
    return infer_morphism(XY, f.cod, comps)


# ---------------------------------------------------------------------------
# partial maps

class PartialMap:
    """A partial morphism ``dom -> cod``; undefined entries are ``None``.

    The defined subset must be closed under homs (a sub-instance) and the
    restriction to it must be natural.
    """

    __slots__ = ("dom", "cod", "components", "assignment")

    def __init__(self, dom: ACSet, cod: ACSet, components: Mapping[str, Sequence[Optional[int]]],
                 assignment: Optional[Mapping[int, Any]] = None):
        if dom.schema != cod.schema:
            raise SchemaError("partial map between different schemas")
        comps = {}
        for t in dom.schema.tables:
            c = components.get(t, ())
            c = c if isinstance(c, tuple) else tuple(c)
            if len(c) != dom.nparts(t):
                raise SchemaError(f"component {t!r} has {len(c)} entries, expected {dom.nparts(t)}")
            comps[t] = c
        self.dom, self.cod = dom, cod
        self.components = comps
        self.assignment = dict(assignment or {})

    @classmethod
    def identity(cls, X: ACSet) -> "PartialMap":
        return cls(X, X, {t: range_tuple(X.nparts(t)) for t in X.schema.tables},
                   {v: Var(v) for v in X.vars()})

    @classmethod
    def total(cls, f: ACSetMorphism) -> "PartialMap":
        return cls(f.dom, f.cod, f.components, f.assignment)

    @classmethod
    def empty(cls, X: ACSet, Y: ACSet) -> "PartialMap":
        return cls(X, Y, {t: (None,) * X.nparts(t) for t in X.schema.tables})

    def __getitem__(self, table):
        return self.components[table]

    def subst(self, value):
        if isinstance(value, Var):
            return self.assignment.get(value.id, value)
        return value

    def defined(self, table: str) -> List[int]:
        return [p for p, x in enumerate(self.components[table]) if x is not None]

    def is_total(self) -> bool:
        return all(x is not None for c in self.components.values() for x in c)

    def violations(self, attrs: bool = True) -> List[str]:
        """Closure and naturality problems.

        With ``attrs=False`` only the part structure is checked; maps
        produced by rewriting may overwrite attribute cells of preserved
        parts, so they are natural on homs only.
        """
        out = []
        s = self.dom.schema
        for h, src, tgt in s.homs:
            dh, ch = self.dom.hom(h), self.cod.hom(h)
            cs, ct = self.components[src], self.components[tgt]
            for p, x in enumerate(cs):
                if x is None:
                    continue
                y = ct[dh[p]]
                if y is None:
                    out.append(f"defined {src}:{p} has undefined {h} image")
                elif ch[x] != y:
                    out.append(f"not natural at {h} on {src}:{p}")
        for a, src, _ in (s.attrs if attrs else ()):
            da, ca = self.dom.attr(a), self.cod.attr(a)
            for p, x in enumerate(self.components[src]):
                if x is not None and not same_value(self.subst(da[p]), ca[x]):
                    out.append(f"attribute {a} differs on {src}:{p}")
        return out

    def __eq__(self, other):
        if not isinstance(other, PartialMap):
            return NotImplemented
        return (self.components == other.components and self.dom == other.dom
                and self.cod == other.cod
                and self.assignment.keys() == other.assignment.keys()
                and all(same_value(v, other.assignment[k]) for k, v in self.assignment.items()))

    def __hash__(self):
        return hash(tuple(self.components.values()))

    def __repr__(self):
        return f"PartialMap({ {t: list(c) for t, c in self.components.items() if c} })"


def compose_partial(p: PartialMap, q: PartialMap) -> PartialMap:
    """Diagrammatic composite ``p ; q`` of partial maps."""
    if p.cod is not q.dom and p.cod != q.dom:
        raise SchemaError("partial maps do not compose: middle objects differ")
    comps = {}
    for t in p.dom.schema.tables:
        pc, qc = p.components[t], q.components[t]
        if _is_range(pc, len(qc)):
            comps[t] = qc
        elif _is_range(qc, len(qc)) and None not in qc:
            comps[t] = pc
        else:
            comps[t] = tuple(None if y is None else qc[y] for y in pc)
    assign = {}
    for v, val in p.assignment.items():
        assign[v] = q.subst(val)
    return PartialMap(p.dom, q.cod, comps, assign)


def push_forward(f: ACSetMorphism, pm: PartialMap) -> Optional[ACSetMorphism]:
    """``f ; pm`` if every part in the image of ``f`` survives, else ``None``.

    Variable bindings are re-read from the new codomain, so attribute
    updates made along ``pm`` are reflected.
    """
    comps = {}
    for t, c in f.components.items():
        pc = pm.components[t]
        col = tuple(pc[x] for x in c)
        if None in col:
            return None
        comps[t] = col
    try:
        return infer_morphism(f.dom, pm.cod, comps, check=False)
    except SchemaError:
        return None


def mono_inverse(d: ACSetMorphism) -> PartialMap:
    """The partial inverse ``cod -> dom`` of a monic morphism."""
    comps = {}
    for t in d.dom.schema.tables:
        col = [None] * d.cod.nparts(t)
        for p, x in enumerate(d.components[t]):
            col[x] = p
        comps[t] = col
    return PartialMap(d.cod, d.dom, comps)


# ---------------------------------------------------------------------------
# pushout complements

def deletion_sets(l: ACSetMorphism, m: ACSetMorphism) -> Tuple[Dict[str, set], Dict[str, set]]:
    """Parts of ``X`` deleted by the match, and parts it preserves."""
    s = l.dom.schema
    deleted, kept = {}, {}
    for t in s.tables:
        mc = m.components[t]
        image = set(l.components[t])
        kept[t] = {mc[q] for q in image}
        deleted[t] = {mc[q] for q in range(m.dom.nparts(t)) if q not in image}
    return deleted, kept


def identified_parts(l: ACSetMorphism, m: ACSetMorphism) -> List[Tuple[str, int]]:
    """Parts of ``X`` hit twice by ``m`` where a hit comes from outside ``l(K)``."""
    out = []
    for t in l.dom.schema.tables:
        image = set(l.components[t])
        hits: Dict[int, List[int]] = {}
        for q, x in enumerate(m.components[t]):
            hits.setdefault(x, []).append(q)
        for x, qs in hits.items():
            if len(qs) > 1 and any(q not in image for q in qs):
                out.append((t, x))
    return out


def restrict(X: ACSet, deleted: Mapping[str, set]) -> Tuple[ACSet, ACSetMorphism]:
    """Sub-instance of ``X`` without ``deleted`` parts, with its inclusion.

    Survivors are renumbered densely in their original order.  The caller
    guarantees that no surviving part refers to a deleted one.
    """
    s = X.schema
    keep: Dict[str, Sequence[int]] = {}
    newid: Dict[str, Optional[List[int]]] = {}
    counts = {}
    for t in s.tables:
        dl = deleted.get(t)
        n = X.nparts(t)
        if not dl:
            keep[t] = range(n)
            newid[t] = None
            counts[t] = n
        else:
            kt = [x for x in range(n) if x not in dl]
            ids = [-1] * n
            for i, x in enumerate(kt):
                ids[x] = i
            keep[t], newid[t], counts[t] = kt, ids, len(kt)
    homs = {}
    for h, src, tgt in s.homs:
        col = X.hom(h)
        if newid[src] is not None:
            col = [col[x] for x in keep[src]]
        if newid[tgt] is not None:
            ids = newid[tgt]
            col = [ids[v] for v in col]
        homs[h] = col
    attrs = {}
    for a, src, _ in s.attrs:
        col = X.attr(a)
        if newid[src] is not None:
            col = [col[x] for x in keep[src]]
        attrs[a] = col
    D = ACSet(s, counts, homs, attrs, check=False)
    d = ACSetMorphism(D, X, {t: tuple(keep[t]) for t in s.tables}, {v: Var(v) for v in D.vars()})
    return D, d


def pushout_complement(l: ACSetMorphism, m: ACSetMorphism) -> Tuple[ACSetMorphism, ACSetMorphism]:
    """Complement ``K -k-> D -d-> X`` of ``K -l-> L -m-> X``.

    ``D`` is ``X`` with the image of ``L - l(K)`` removed.  Raises
    :class:`GluingViolation` when the dangling or identification condition
    fails and :class:`NonMonicInterface` when ``l`` is not monic.
    """
    if any(len(set(c)) != len(c) for c in l.components.values()):
        raise NonMonicInterface("pushout complement requires a monic K -> L")
    if l.cod is not m.dom and l.cod != m.dom:
        raise SchemaError("l and m do not compose")
    X = m.cod
    s = X.schema
    deleted, kept = deletion_sets(l, m)
    clash = identified_parts(l, m)
    if clash:
        raise GluingViolation("identification", clash)
    dangling = []
    for h, src, tgt in s.homs:
        for y in deleted[tgt]:
            for x in X.preimage(h, y):
                if x not in deleted[src]:
                    dangling.append((src, x))
    if dangling:
        raise GluingViolation("dangling", set(dangling))
    D, d = restrict(X, deleted)
    K = l.dom
    comps = {}
    for t in s.tables:
        dinv = {x: i for i, x in enumerate(d.components[t])} if deleted[t] else None
        col = []
        for q in l.components[t]:
            x = m.components[t][q]
            col.append(dinv[x] if dinv is not None else x)
        comps[t] = col
    assign = {u: m.subst(val) for u, val in l.assignment.items()}
    k = ACSetMorphism(K, D, comps, assign)
    return k, d


# ---------------------------------------------------------------------------
# verification oracle

def _value_pool(schema: Schema, objs: Sequence[ACSet]) -> Dict[str, List[Any]]:
    pool: Dict[str, List[Any]] = {name: [] for name, _ in schema.attr_types}
    for X in objs:
        for a, _, typ in schema.attrs:
            for v in X.attr(a):
                if not isinstance(v, Var) and not any(same_value(v, w) for w in pool[typ]):
                    pool[typ].append(v)
    fresh = {"int": -987654321, "float": -9.87654321e8, "str": "\x00fresh", "bool": None}
    for name, kind in schema.attr_types:
        if kind == "bool":
            for b in (False, True):
                if not any(same_value(b, w) for w in pool[name]):
                    pool[name].append(b)
        else:
            pool[name].append(fresh[kind])
    return pool


def enumerate_acsets(schema: Schema, bounds: Mapping[str, int],
                     pool: Mapping[str, Sequence[Any]]):
    """Every ground instance with at most ``bounds[t]`` parts per table."""
    tables = schema.tables
    for counts in itertools.product(*(range(bounds.get(t, 0) + 1) for t in tables)):
        c = dict(zip(tables, counts))
        hom_choices = []
        for h, src, tgt in schema.homs:
            hom_choices.append(list(itertools.product(range(c[tgt]), repeat=c[src])))
        attr_choices = []
        for a, src, typ in schema.attrs:
            attr_choices.append(list(itertools.product(pool[typ], repeat=c[src])))
        for hs in itertools.product(*hom_choices):
            for as_ in itertools.product(*attr_choices):
                yield ACSet(schema, c, dict(zip(schema.hom_names, hs)),
                            dict(zip(schema.attr_names, as_)), check=False)


def _same_morphism(a: ACSetMorphism, b: ACSetMorphism) -> bool:
    return (a.components == b.components and a.assignment.keys() == b.assignment.keys()
            and all(same_value(v, b.assignment[k]) for k, v in a.assignment.items()))


def verify_pushout(f: ACSetMorphism, g: ACSetMorphism, P: ACSet, px: ACSetMorphism,
                   py: ACSetMorphism, budget: int = 10) -> bool:
    """Brute-force check of the pushout universal property.

    Every cocone over ``(f, g)`` into a ground instance whose tables are no
    larger than ``max(|P_t|, |X_t| + |Y_t|)`` must factor uniquely through
    ``(px, py)``.  ``budget`` bounds the total size of enumerated targets.
    """
    X, Y = f.cod, g.cod
    s = X.schema
    if px.cod is not P and px.cod != P or py.cod is not P and py.cod != P:
        return False
    if not (is_natural(px) and is_natural(py)):
        return False
    if not _same_morphism(compose(f, px), compose(g, py)):
        return False
    bounds = {t: max(P.nparts(t), X.nparts(t) + Y.nparts(t)) for t in s.tables}
    if sum(bounds.values()) > budget:
        raise BudgetExceeded(f"targets up to {sum(bounds.values())} parts exceed budget {budget}")
    pool = _value_pool(s, [X, Y, P, f.dom])
    for Q in enumerate_acsets(s, bounds, pool):
        hx = homomorphisms(X, Q)
        if not hx:
            continue
        hy = homomorphisms(Y, Q)
        if not hy:
            continue
        hp = homomorphisms(P, Q)
        for qx in hx:
            fx = compose(f, qx)
            for qy in hy:
                if not _same_morphism(fx, compose(g, qy)):
                    continue
                n = sum(1 for u in hp
                        if _same_morphism(compose(px, u), qx) and _same_morphism(compose(py, u), qy))
                if n != 1:
                    return False
    return True
