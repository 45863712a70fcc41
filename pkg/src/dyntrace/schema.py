"""Attributed C-set schemas, instances, morphisms and homomorphism search.

A schema is a free category presented by tables, attribute types, homs
(table -> table) and attributes (table -> attribute type).  An instance
(:class:`ACSet`) assigns each table a dense range of part ids, each hom a
total function and each attribute a column of values.  Attribute values are
plain Python scalars or :class:`Var` placeholders; patterns may contain
variables, world states may not.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

KINDS = ("int", "float", "str", "bool")

_PY_TYPES = {"int": int, "float": float, "str": str, "bool": bool}


class SchemaError(ValueError):
    """Raised when an instance or morphism does not fit its schema."""


@dataclass(frozen=True, order=True)
class Var:
    """An attribute variable, identified by a natural number."""

    id: int

    def __repr__(self):
        return f"Var({self.id})"


def same_value(a, b) -> bool:
    """Kind-strict equality of attribute values (``1 != True``, ``1 != 1.0``)."""
    return type(a) is type(b) and a == b


def value_kind_ok(value, kind: str) -> bool:
    if isinstance(value, Var):
        return True
    return type(value) is _PY_TYPES[kind]


def value_key(value):
    """Hashable key that never conflates values of different kinds."""
    return (type(value).__name__, value)


@dataclass(frozen=True)
class Schema:
    """A finitely presented free schema.

    Parameters
    ----------
    tables : tuple of str
    attr_types : tuple of (name, kind) pairs, kind in ``KINDS``
    homs : tuple of (name, src table, tgt table)
    attrs : tuple of (name, src table, attr type)
    """

    tables: Tuple[str, ...] = ()
    attr_types: Tuple[Tuple[str, str], ...] = ()
    homs: Tuple[Tuple[str, str, str], ...] = ()
    attrs: Tuple[Tuple[str, str, str], ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "attr_types", tuple(tuple(x) for x in self.attr_types))
        object.__setattr__(self, "homs", tuple(tuple(x) for x in self.homs))
        object.__setattr__(self, "attrs", tuple(tuple(x) for x in self.attrs))

    @cached_property
    def hom_names(self) -> Tuple[str, ...]:
        return tuple(h for h, _, _ in self.homs)

    @cached_property
    def attr_names(self) -> Tuple[str, ...]:
        return tuple(a for a, _, _ in self.attrs)

    @cached_property
    def hom_src(self) -> Dict[str, str]:
        return {h: s for h, s, _ in self.homs}

    @cached_property
    def hom_tgt(self) -> Dict[str, str]:
        return {h: t for h, _, t in self.homs}

    @cached_property
    def attr_src(self) -> Dict[str, str]:
        return {a: s for a, s, _ in self.attrs}

    @cached_property
    def attr_type(self) -> Dict[str, str]:
        return {a: t for a, _, t in self.attrs}

    @cached_property
    def type_kind(self) -> Dict[str, str]:
        return dict(self.attr_types)

    def attr_kind(self, attr: str) -> str:
        return self.type_kind[self.attr_type[attr]]

    @cached_property
    def homs_out(self) -> Dict[str, Tuple[str, ...]]:
        out = {t: [] for t in self.tables}
        for h, s, _ in self.homs:
            out.setdefault(s, []).append(h)
        return {t: tuple(v) for t, v in out.items()}

    @cached_property
    def homs_in(self) -> Dict[str, Tuple[str, ...]]:
        inc = {t: [] for t in self.tables}
        for h, _, t in self.homs:
            inc.setdefault(t, []).append(h)
        return {t: tuple(v) for t, v in inc.items()}

    @cached_property
    def attrs_of(self) -> Dict[str, Tuple[str, ...]]:
        out = {t: [] for t in self.tables}
        for a, s, _ in self.attrs:
            out.setdefault(s, []).append(a)
        return {t: tuple(v) for t, v in out.items()}

    @cached_property
    def violations(self) -> Tuple[str, ...]:
        return tuple(validate_schema(self))

    def check(self):
        if self.violations:
            raise SchemaError("invalid schema: " + "; ".join(self.violations))


def validate_schema(s: Schema) -> List[str]:
    """Return a list of human-readable violations; empty iff well formed."""
    out = []
    tables = set()
    for t in s.tables:
        if t in tables:
            out.append(f"duplicate table {t!r}")
        tables.add(t)
    types = set()
    for name, kind in s.attr_types:
        if name in types:
            out.append(f"duplicate attribute type {name!r}")
        types.add(name)
        if kind not in KINDS:
            out.append(f"attribute type {name!r} has unknown kind {kind!r}")
    for name in tables & types:
        out.append(f"{name!r} is both a table and an attribute type")
    seen = set()
    for h, src, tgt in s.homs:
        if h in seen:
            out.append(f"duplicate hom {h!r}")
        seen.add(h)
        if src not in tables:
            out.append(f"hom {h!r} has unknown source {src!r}")
        if tgt in types:
            out.append(f"hom {h!r} targets attribute type {tgt!r}")
        elif tgt not in tables:
            out.append(f"hom {h!r} has unknown target {tgt!r}")
    seen_attrs = set()
    for a, src, tgt in s.attrs:
        if a in seen_attrs or a in seen:
            out.append(f"duplicate attribute {a!r}")
        seen_attrs.add(a)
        if src not in tables:
            out.append(f"attribute {a!r} has unknown source {src!r}")
        if tgt in tables:
            out.append(f"attribute {a!r} targets table {tgt!r}")
        elif tgt not in types:
            out.append(f"attribute {a!r} has unknown attribute type {tgt!r}")
    return out


class ACSet:
    """An immutable instance of a :class:`Schema`.

    ``counts`` maps tables to part counts, ``homs`` maps hom names to
    sequences of target ids and ``attrs`` maps attribute names to
    sequences of values.  Missing tables default to zero parts.
    """

    __slots__ = ("schema", "_counts", "_homs", "_attrs", "_hash", "_index", "_vars")

    def __init__(self, schema: Schema, counts: Optional[Mapping[str, int]] = None,
                 homs: Optional[Mapping[str, Sequence[int]]] = None,
                 attrs: Optional[Mapping[str, Sequence[Any]]] = None, *, check: bool = True):
        counts = dict(counts or {})
        homs = dict(homs or {})
        attrs = dict(attrs or {})
        if check:
            schema.check()
            extra = set(counts) - set(schema.tables)
            extra |= set(homs) - set(schema.hom_names)
            extra |= set(attrs) - set(schema.attr_names)
            if extra:
                raise SchemaError(f"unknown schema elements {sorted(extra)}")
        self.schema = schema
        self._counts = {t: int(counts.get(t, 0)) for t in schema.tables}
        self._homs = {}
        for h, src, _ in schema.homs:
            col = homs.get(h)
            self._homs[h] = tuple(col) if col is not None else ()
        self._attrs = {}
        for a, src, _ in schema.attrs:
            col = attrs.get(a)
            self._attrs[a] = tuple(col) if col is not None else ()
        self._hash = None
        self._index = {}
        self._vars = None
        if check:
            problems = self.violations()
            if problems:
                raise SchemaError("; ".join(problems))

    @classmethod
    def empty(cls, schema: Schema) -> "ACSet":
        return cls(schema)

    def violations(self) -> List[str]:
        out = []
        s = self.schema
        for t, n in self._counts.items():
            if n < 0:
                out.append(f"negative part count for {t!r}")
        for h, src, tgt in s.homs:
            col = self._homs[h]
            if len(col) != self._counts[src]:
                out.append(f"hom {h!r} has {len(col)} entries, expected {self._counts[src]}")
                continue
            n = self._counts[tgt]
            for p, x in enumerate(col):
                if type(x) is not int or not 0 <= x < n:
                    out.append(f"hom {h!r} sends part {p} to invalid id {x!r}")
        for a, src, _ in s.attrs:
            col = self._attrs[a]
            if len(col) != self._counts[src]:
                out.append(f"attribute {a!r} has {len(col)} entries, expected {self._counts[src]}")
                continue
            kind = s.attr_kind(a)
            for p, v in enumerate(col):
                if not value_kind_ok(v, kind):
                    out.append(f"attribute {a!r} of part {p} is {v!r}, expected kind {kind}")
        return out

    # accessors -----------------------------------------------------------
    def nparts(self, table: str) -> int:
        return self._counts[table]

    def parts(self, table: str) -> range:
        return range(self._counts[table])

    @property
    def counts(self) -> Dict[str, int]:
        return dict(self._counts)

    def total_parts(self) -> int:
        return sum(self._counts.values())

    def hom(self, name: str) -> Tuple[int, ...]:
        return self._homs[name]

    def attr(self, name: str) -> Tuple[Any, ...]:
        return self._attrs[name]

    def subpart(self, part: int, name: str):
        if name in self._homs:
            return self._homs[name][part]
        return self._attrs[name][part]

    def preimage(self, hom: str, target: int) -> Sequence[int]:
        """Parts sent to ``target`` by ``hom`` (cached inverse index)."""
        idx = self._index.get(hom)
        if idx is None:
            idx = [[] for _ in range(self._counts[self.schema.hom_tgt[hom]])]
            for p, x in enumerate(self._homs[hom]):
                idx[x].append(p)
            self._index[hom] = idx
        return idx[target]

    def vars(self) -> Tuple[int, ...]:
        """Sorted ids of the variables occurring in attribute cells."""
        if self._vars is None:
            found = set()
            for col in self._attrs.values():
                for v in col:
                    if isinstance(v, Var):
                        found.add(v.id)
            self._vars = tuple(sorted(found))
        return self._vars

    def is_ground(self) -> bool:
        return not self.vars()

    # value semantics ------------------------------------------------------
    def _key(self):
        return (tuple(self._counts.values()), tuple(self._homs.values()),
                tuple(tuple(value_key(v) for v in col) for col in self._attrs.values()))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ACSet):
            return NotImplemented
        if self.schema != other.schema or self._counts != other._counts:
            return False
        if self._homs != other._homs:
            return False
        for a, col in self._attrs.items():
            ocol = other._attrs[a]
            if col is ocol:
                continue
            if len(col) != len(ocol) or not all(same_value(x, y) for x, y in zip(col, ocol)):
                return False
        return True

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        counts = ", ".join(f"{t}={n}" for t, n in self._counts.items())
        return f"ACSet({self.schema.name or 'schema'}: {counts})"

    def replace(self, counts=None, homs=None, attrs=None, check=False) -> "ACSet":
        """Copy with some columns replaced."""
        c = dict(self._counts)
        c.update(counts or {})
        h = dict(self._homs)
        h.update(homs or {})
        a = dict(self._attrs)
        a.update(attrs or {})
        return ACSet(self.schema, c, h, a, check=check)


class ACSetBuilder:
    """Mutable helper for assembling an :class:`ACSet` part by part.

    >>> b = ACSetBuilder(graph_schema)            # doctest: +SKIP
    >>> v = b.add_part("V"); b.add_part("E", src=v, tgt=v)  # doctest: +SKIP
    """

    def __init__(self, schema: Schema, base: Optional[ACSet] = None):
        schema.check()
        self.schema = schema
        self.counts = {t: 0 for t in schema.tables}
        self.homs = {h: [] for h in schema.hom_names}
        self.attrs = {a: [] for a in schema.attr_names}
        if base is not None:
            self.counts.update(base.counts)
            for h in schema.hom_names:
                self.homs[h] = list(base.hom(h))
            for a in schema.attr_names:
                self.attrs[a] = list(base.attr(a))

    def add_part(self, table: str, **subparts) -> int:
        s = self.schema
        unknown = set(subparts) - set(s.homs_out[table]) - set(s.attrs_of[table])
        if unknown:
            raise SchemaError(f"{table!r} has no homs/attributes {sorted(unknown)}")
        for h in s.homs_out[table]:
            if h not in subparts:
                raise SchemaError(f"missing hom {h!r} for new {table!r} part")
            self.homs[h].append(subparts[h])
        for a in s.attrs_of[table]:
            if a not in subparts:
                raise SchemaError(f"missing attribute {a!r} for new {table!r} part")
            v = subparts[a]
            if s.attr_kind(a) == "float" and type(v) is int:
                v = float(v)
            self.attrs[a].append(v)
        self.counts[table] += 1
        return self.counts[table] - 1

    def add_parts(self, table: str, n: int, **columns) -> List[int]:
        return [self.add_part(table, **{k: col[i] for k, col in columns.items()})
                for i in range(n)]

    def set_subpart(self, part: int, name: str, value):
        if name in self.homs:
            self.homs[name][part] = value
        else:
            self.attrs[name][part] = value

    def build(self) -> ACSet:
        return ACSet(self.schema, self.counts, self.homs, self.attrs)


def representable(schema: Schema, table: str) -> ACSet:
    """The free instance on one part of ``table``: one part per hom path.

    Every attribute cell gets its own variable, numbered in creation order.
    """
    schema.check()
    b = ACSetBuilder(schema)
    pending: List[Tuple[str, Tuple[str, ...]]] = [(table, ())]
    ids: Dict[Tuple[str, ...], int] = {}
    order = []
    # breadth first over paths; a cycle in the hom graph makes this infinite
    while pending:
        t, path = pending.pop(0)
        if len(path) > len(schema.homs):
            raise SchemaError(f"representable of {table!r} is infinite (cyclic homs)")
        order.append((t, path))
        for h in schema.homs_out[t]:
            pending.append((schema.hom_tgt[h], path + (h,)))
    nvar = 0
    # create parts deepest-first so hom targets exist
    for t, path in sorted(order, key=lambda tp: -len(tp[1])):
        subs = {}
        for h in schema.homs_out[t]:
            subs[h] = ids[path + (h,)]
        for a in schema.attrs_of[t]:
            subs[a] = None
        ids[path] = b.add_part(t, **subs)
    # number variables in schema attr order then part order
    for a in schema.attr_names:
        col = b.attrs[a]
        for p in range(len(col)):
            col[p] = Var(nvar)
            nvar += 1
    return b.build()


class ACSetMorphism:
    """A natural transformation ``dom -> cod`` between instances.

    ``components`` maps each table to a tuple of target ids;
    ``assignment`` maps each variable id of ``dom`` to a value of ``cod``.
    Construction checks shapes only; use :func:`is_natural` for the rest.
    """

    __slots__ = ("dom", "cod", "components", "assignment", "_hash")

    def __init__(self, dom: ACSet, cod: ACSet, components: Mapping[str, Sequence[int]],
                 assignment: Optional[Mapping[int, Any]] = None):
        if dom.schema != cod.schema:
            raise SchemaError("morphism between instances of different schemas")
        comps = {}
        for t in dom.schema.tables:
            c = tuple(components.get(t, ()))
            if len(c) != dom.nparts(t):
                raise SchemaError(f"component {t!r} has {len(c)} entries, expected {dom.nparts(t)}")
            comps[t] = c
        self.dom = dom
        self.cod = cod
        self.components = comps
        self.assignment = dict(assignment or {})
        self._hash = None

    def __getitem__(self, table: str) -> Tuple[int, ...]:
        return self.components[table]

    def subst(self, value):
        if isinstance(value, Var):
            return self.assignment.get(value.id, value)
        return value

    def __eq__(self, other):
        if not isinstance(other, ACSetMorphism):
            return NotImplemented
        return (self.components == other.components and self.dom == other.dom
                and self.cod == other.cod
                and self.assignment.keys() == other.assignment.keys()
                and all(same_value(v, other.assignment[k]) for k, v in self.assignment.items()))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((tuple(self.components.values()),
                               tuple(sorted((k, value_key(v)) for k, v in self.assignment.items()))))
        return self._hash

    def __repr__(self):
        comps = ", ".join(f"{t}={list(c)}" for t, c in self.components.items() if c)
        extra = f", vars={self.assignment}" if self.assignment else ""
        return f"ACSetMorphism({comps}{extra})"


def identity(X: ACSet) -> ACSetMorphism:
    return ACSetMorphism(X, X, {t: range(X.nparts(t)) for t in X.schema.tables},
                         {v: Var(v) for v in X.vars()})


def compose(f: ACSetMorphism, g: ACSetMorphism) -> ACSetMorphism:
    """Diagrammatic composite ``f ; g``."""
    if f.cod is not g.dom and f.cod != g.dom:
        raise SchemaError("cannot compose: codomain and domain differ")
    comps = {t: tuple(g.components[t][x] for x in c) for t, c in f.components.items()}
    assign = {v: g.subst(val) for v, val in f.assignment.items()}
    return ACSetMorphism(f.dom, g.cod, comps, assign)


def infer_morphism(dom: ACSet, cod: ACSet, components: Mapping[str, Sequence[int]],
                   check: bool = True) -> ACSetMorphism:
    """Build a morphism from its components, reading off variable bindings.

    Raises :class:`SchemaError` if the components are not natural or the
    attribute cells cannot be reconciled.
    """
    s = dom.schema
    comps = {t: tuple(components.get(t, ())) for t in s.tables}
    assign: Dict[int, Any] = {}
    for a, src, _ in s.attrs:
        dcol, ccol, comp = dom.attr(a), cod.attr(a), comps[src]
        for p, v in enumerate(dcol):
            target = ccol[comp[p]]
            if isinstance(v, Var):
                if v.id in assign:
                    if not same_value(assign[v.id], target):
                        raise SchemaError(f"variable {v.id} bound inconsistently")
                else:
                    assign[v.id] = target
            elif not same_value(v, target):
                raise SchemaError(f"attribute {a!r} mismatch at part {p}")
    f = ACSetMorphism(dom, cod, comps, assign)
    if check:
        for h, src, tgt in s.homs:
            dh, ch = dom.hom(h), cod.hom(h)
            csrc, ctgt = comps[src], comps[tgt]
            for p in range(dom.nparts(src)):
                if ctgt[dh[p]] != ch[csrc[p]]:
                    raise SchemaError(f"not natural at hom {h!r}, part {p}")
    return f


def is_natural(f: ACSetMorphism) -> bool:
    """True iff ``f`` commutes with every hom and respects every attribute."""
    dom, cod = f.dom, f.cod
    if dom.schema != cod.schema:
        raise SchemaError("schema mismatch")
    s = dom.schema
    for t in s.tables:
        n = cod.nparts(t)
        if any(type(x) is not int or not 0 <= x < n for x in f.components[t]):
            return False
    for h, src, tgt in s.homs:
        dh, ch = dom.hom(h), cod.hom(h)
        csrc, ctgt = f.components[src], f.components[tgt]
        for p in range(dom.nparts(src)):
            if ctgt[dh[p]] != ch[csrc[p]]:
                return False
    if set(dom.vars()) - set(f.assignment):
        return False
    for a, src, _ in s.attrs:
        dcol, ccol, comp = dom.attr(a), cod.attr(a), f.components[src]
        for p, v in enumerate(dcol):
            if not same_value(f.subst(v), ccol[comp[p]]):
                return False
    return True


def morphism_predicates(f: ACSetMorphism) -> Dict[str, bool]:
    """``mono``/``iso``/``total_ground`` flags of a natural morphism.

    ``total_ground`` holds when every variable of the domain is sent to a
    concrete value, i.e. the morphism fully instantiates its pattern.
    """
    mono = all(len(set(c)) == len(c) for c in f.components.values())
    bij = mono and all(len(f.components[t]) == f.cod.nparts(t) for t in f.dom.schema.tables)
    vals = list(f.assignment.values())
    var_bij = (all(isinstance(v, Var) for v in vals) and len(set(vals)) == len(vals)
               and {v.id for v in vals} == set(f.cod.vars()))
    total_ground = not any(isinstance(v, Var) for v in vals)
    return {"mono": mono, "iso": bij and var_bij, "total_ground": total_ground}


# ---------------------------------------------------------------------------
# homomorphism search

def _table_order(schema: Schema) -> List[str]:
    # tables whose parts determine many others (long outgoing hom chains) first
    depth: Dict[str, int] = {}

    def d(t, seen=()):
        if t in depth:
            return depth[t]
        if t in seen:
            return 0
        val = 1 + max((d(schema.hom_tgt[h], seen + (t,)) for h in schema.homs_out[t]), default=-1)
        depth[t] = val
        return val

    for t in schema.tables:
        d(t)
    return sorted(schema.tables, key=lambda t: (-depth[t], schema.tables.index(t)))


class _Search:
    def __init__(self, A: ACSet, X: ACSet, monic: bool):
        self.A, self.X, self.monic = A, X, monic
        s = A.schema
        self.s = s
        self.comp = {t: [None] * A.nparts(t) for t in s.tables}
        self.used = {t: set() for t in s.tables}
        self.binding: Dict[int, Any] = {}
        self.trail: List[tuple] = []
        self.out = {t: [(h, s.hom_tgt[h], A.hom(h), X.hom(h)) for h in s.homs_out[t]]
                    for t in s.tables}
        self.attr_cols = {t: [(A.attr(a), X.attr(a)) for a in s.attrs_of[t]] for t in s.tables}
        self.slots = [(t, p) for t in _table_order(s) for p in range(A.nparts(t))]
        self.results: List[Dict[str, Tuple[int, ...]]] = []
        self.accept = None
        self.limit = None

    def assign(self, t, p, x) -> bool:
        cur = self.comp[t][p]
        if cur is not None:
            return cur == x
        if self.monic and x in self.used[t]:
            return False
        mark = len(self.trail)
        for acol, xcol in self.attr_cols[t]:
            av, xv = acol[p], xcol[x]
            if isinstance(av, Var):
                bound = self.binding.get(av.id, _UNBOUND)
                if bound is _UNBOUND:
                    self.binding[av.id] = xv
                    self.trail.append(("v", av.id))
                elif not same_value(bound, xv):
                    self.undo(mark)
                    return False
            elif not same_value(av, xv):
                self.undo(mark)
                return False
        self.comp[t][p] = x
        self.used[t].add(x)
        self.trail.append(("c", t, p, x))
        for h, t2, ah, xh in self.out[t]:
            if not self.assign(t2, ah[p], xh[x]):
                self.undo(mark)
                return False
        return True

    def undo(self, mark):
        trail = self.trail
        while len(trail) > mark:
            item = trail.pop()
            if item[0] == "v":
                del self.binding[item[1]]
            else:
                _, t, p, x = item
                self.comp[t][p] = None
                self.used[t].discard(x)

    def candidates(self, t, p):
        best = None
        for h, t2, ah, xh in self.out[t]:
            y = self.comp[t2][ah[p]]
            if y is not None:
                pre = self.X.preimage(h, y)
                if best is None or len(pre) < len(best):
                    best = pre
        if best is None:
            return range(self.X.nparts(t))
        return best

    def run(self, k=0):
        slots = self.slots
        while k < len(slots) and self.comp[slots[k][0]][slots[k][1]] is not None:
            k += 1
        if k == len(slots):
            found = ({t: tuple(c) for t, c in self.comp.items()}, dict(self.binding))
            if self.accept is None or self.accept(found):
                self.results.append(found)
            return
        t, p = slots[k]
        for x in list(self.candidates(t, p)):
            mark = len(self.trail)
            if self.assign(t, p, x):
                self.run(k + 1)
                self.undo(mark)
            if self.limit is not None and len(self.results) >= self.limit:
                return


_UNBOUND = object()


def homomorphisms(A: ACSet, X: ACSet, monic: bool = False,
                  forced: Optional[Mapping[str, Mapping[int, int]]] = None) -> List[ACSetMorphism]:
    """All natural morphisms ``A -> X`` extending ``forced``.

    Results are sorted lexicographically by their components in schema
    table order.  Variables of ``A`` bind to whatever value sits in the
    matched cell of ``X``; a variable used twice must bind equal values.
    Concrete values of ``A`` must match exactly.
    """
    if A.schema != X.schema:
        raise SchemaError("schema mismatch")
    search = _Search(A, X, monic)
    for t, assignment in (forced or {}).items():
        if t not in A.schema.tables:
            raise ValueError(f"forced assignment for unknown table {t!r}")
        for p, x in assignment.items():
            if not 0 <= p < A.nparts(t) or not 0 <= x < X.nparts(t):
                raise ValueError(f"forced assignment {t}:{p}->{x} out of range")
    for t in A.schema.tables:
        for p, x in sorted((forced or {}).get(t, {}).items()):
            if not search.assign(t, p, x):
                return []
    search.run()
    tables = A.schema.tables
    search.results.sort(key=lambda r: tuple(r[0][t] for t in tables))
    vars_ = A.vars()
    return [ACSetMorphism(A, X, comps, {v: b[v] for v in vars_}) for comps, b in search.results]


def isomorphic(X: ACSet, Y: ACSet) -> bool:
    """True iff some morphism ``X -> Y`` is an isomorphism."""
    if X.schema != Y.schema or X.counts != Y.counts or len(X.vars()) != len(Y.vars()):
        return False
    search = _Search(X, Y, monic=True)
    xvars = X.vars()

    def var_bijective(found):
        vals = [found[1][v] for v in xvars]
        return all(isinstance(v, Var) for v in vals) and len(set(vals)) == len(vals)

    search.accept = var_bijective
    search.limit = 1
    search.run()
    return bool(search.results)


def iter_vars(values: Iterable[Any]) -> Iterable[int]:
    for v in values:
        if isinstance(v, Var):
            yield v.id
