"""Rewrite rules with agent shapes, and their DPO / SPO application."""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .colimits import (PartialMap, deletion_sets, identified_parts, initial_morphism,
                       pushout, pushout_complement, restrict)
from .schema import (ACSet, ACSetMorphism, Var, compose, homomorphisms,
                     infer_morphism, is_natural, value_kind_ok)

SUPPORTED = ("DPO", "SPO")
KNOWN_UNSUPPORTED = ("SqPO", "PBPO+")

INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1


class AttrExprError(ValueError):
    pass


class RuleError(ValueError):
    pass


class UnsupportedSemantics(RuleError):
    pass


# ---------------------------------------------------------------------------
# attribute expressions

@dataclass(frozen=True)
class Lit:
    value: Any


@dataclass(frozen=True)
class Ref:
    var: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "AttrExpr"
    right: "AttrExpr"


@dataclass(frozen=True)
class UnOp:
    op: str
    arg: "AttrExpr"


AttrExpr = Union[Lit, Ref, BinOp, UnOp]

ARITH = ("+", "-", "*")
COMPARE = ("<", "<=", ">", ">=", "==", "!=")
LOGIC = ("and", "or")

_AST_BIN = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*"}
_AST_CMP = {ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">", ast.GtE: ">=", ast.Eq: "==", ast.NotEq: "!="}


def parse_expr(text: str) -> AttrExpr:
    """Parse ``"v0 + 4"``-style text; variables are written ``v<id>``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise AttrExprError(f"cannot parse expression {text!r}: {e.msg}") from None
    return _from_ast(tree.body, text)


def _from_ast(node, text):
    if isinstance(node, ast.Constant) and type(node.value) in (int, float, str, bool):
        return Lit(node.value)
    if isinstance(node, ast.Name):
        if node.id in ("True", "False"):
            return Lit(node.id == "True")
        if node.id.startswith("v") and node.id[1:].isdigit():
            return Ref(int(node.id[1:]))
        raise AttrExprError(f"unknown name {node.id!r} in {text!r}")
    if isinstance(node, ast.BinOp) and type(node.op) in _AST_BIN:
        return BinOp(_AST_BIN[type(node.op)], _from_ast(node.left, text), _from_ast(node.right, text))
    if isinstance(node, ast.BoolOp):
        op = "and" if isinstance(node.op, ast.And) else "or"
        vals = [_from_ast(v, text) for v in node.values]
        out = vals[0]
        for v in vals[1:]:
            out = BinOp(op, out, v)
        return out
    if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _AST_CMP:
        return BinOp(_AST_CMP[type(node.ops[0])], _from_ast(node.left, text),
                     _from_ast(node.comparators[0], text))
    if isinstance(node, ast.UnaryOp):
        arg = _from_ast(node.operand, text)
        if isinstance(node.op, ast.USub):
            if isinstance(arg, Lit) and type(arg.value) in (int, float):
                return Lit(-arg.value)
            return UnOp("-", arg)
        if isinstance(node.op, ast.Not):
            return UnOp("not", arg)
    raise AttrExprError(f"unsupported syntax in {text!r}")


def format_expr(e: AttrExpr) -> str:
    if isinstance(e, Lit):
        return repr(e.value)
    if isinstance(e, Ref):
        return f"v{e.var}"
    if isinstance(e, UnOp):
        return f"(-{format_expr(e.arg)})" if e.op == "-" else f"(not {format_expr(e.arg)})"
    return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"


def expr_vars(e: AttrExpr) -> set:
    if isinstance(e, Ref):
        return {e.var}
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, UnOp):
        return expr_vars(e.arg)
    return set()


def _kind_of(v) -> str:
    return {int: "int", float: "float", str: "str", bool: "bool"}.get(type(v), "?")


def expr_kind(e: AttrExpr, var_kinds: Mapping[int, str]) -> str:
    """Static kind of ``e``; raises :class:`AttrExprError` on a type error."""
    if isinstance(e, Lit):
        return _kind_of(e.value)
    if isinstance(e, Ref):
        if e.var not in var_kinds:
            raise AttrExprError(f"unbound variable v{e.var}")
        return var_kinds[e.var]
    if isinstance(e, UnOp):
        k = expr_kind(e.arg, var_kinds)
        if e.op == "-" and k in ("int", "float"):
            return k
        if e.op == "not" and k == "bool":
            return k
        raise AttrExprError(f"cannot apply {e.op!r} to {k}")
    lk, rk = expr_kind(e.left, var_kinds), expr_kind(e.right, var_kinds)
    if lk != rk:
        raise AttrExprError(f"kind mismatch: {lk} {e.op} {rk}")
    if e.op in ARITH:
        if lk in ("int", "float") or (e.op == "+" and lk == "str"):
            return lk
        raise AttrExprError(f"cannot apply {e.op!r} to {lk}")
    if e.op in LOGIC:
        if lk == "bool":
            return lk
        raise AttrExprError(f"cannot apply {e.op!r} to {lk}")
    return "bool"


def eval_attr_expr(e: AttrExpr, binding: Mapping[int, Any]):
    """Strict evaluation; integer results outside 64 bits are an error."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Ref):
        if e.var not in binding:
            raise AttrExprError(f"unbound variable v{e.var}")
        v = binding[e.var]
        if isinstance(v, Var):
            raise AttrExprError(f"variable v{e.var} is bound to a variable, not a value")
        return v
    if isinstance(e, UnOp):
        x = eval_attr_expr(e.arg, binding)
        if e.op == "-":
            if _kind_of(x) not in ("int", "float"):
                raise AttrExprError(f"cannot negate {x!r}")
            return _checked(-x)
        if type(x) is not bool:
            raise AttrExprError(f"cannot apply 'not' to {x!r}")
        return not x
    a = eval_attr_expr(e.left, binding)
    if e.op in LOGIC:
        if type(a) is not bool:
            raise AttrExprError(f"{e.op!r} expects booleans")
        if (e.op == "and" and not a) or (e.op == "or" and a):
            b = eval_attr_expr(e.right, binding)
            if type(b) is not bool:
                raise AttrExprError(f"{e.op!r} expects booleans")
            return a
        b = eval_attr_expr(e.right, binding)
        if type(b) is not bool:
            raise AttrExprError(f"{e.op!r} expects booleans")
        return b
    b = eval_attr_expr(e.right, binding)
    if type(a) is not type(b):
        raise AttrExprError(f"kind mismatch: {a!r} {e.op} {b!r}")
    if e.op in ARITH:
        if type(a) is bool or (type(a) is str and e.op != "+"):
            raise AttrExprError(f"cannot apply {e.op!r} to {a!r}")
        if e.op == "+":
            return _checked(a + b)
        if e.op == "-":
            return _checked(a - b)
        return _checked(a * b)
    if e.op == "<":
        return a < b
    if e.op == "<=":
        return a <= b
    if e.op == ">":
        return a > b
    if e.op == ">=":
        return a >= b
    if e.op == "==":
        return a == b
    return a != b


def _checked(x):
    if type(x) is int and not INT_MIN <= x <= INT_MAX:
        raise AttrExprError("integer overflow")
    if type(x) is float and (x != x or abs(x) == float("inf")):
        raise AttrExprError("float overflow")
    return x


# ---------------------------------------------------------------------------
# rules

@dataclass(eq=False)
class RewriteRule:
    """A span ``L <-l- K -r-> R`` with input/output agent shapes.

    ``agent_in`` is a morphism ``A -> L`` and ``agent_out`` a morphism
    ``B -> R``; both default to the empty agent.  ``exprs`` maps attribute
    cells ``(attr, R part)`` to expressions over the variables of ``L``.
    """

    l: ACSetMorphism
    r: ACSetMorphism
    agent_in: Optional[ACSetMorphism] = None
    agent_out: Optional[ACSetMorphism] = None
    exprs: Dict[Tuple[str, int], AttrExpr] = field(default_factory=dict)
    semantics: str = "DPO"
    monic: bool = False
    name: str = ""

    def __post_init__(self):
        if self.agent_in is None:
            self.agent_in = initial_morphism(self.l.cod)
        if self.agent_out is None:
            self.agent_out = initial_morphism(self.r.cod)
        self.exprs = dict(self.exprs)

    @property
    def L(self) -> ACSet:
        return self.l.cod

    @property
    def K(self) -> ACSet:
        return self.l.dom

    @property
    def R(self) -> ACSet:
        return self.r.cod

    @property
    def A(self) -> ACSet:
        return self.agent_in.dom

    @property
    def B(self) -> ACSet:
        return self.agent_out.dom

    def __eq__(self, other):
        if not isinstance(other, RewriteRule):
            return NotImplemented
        return (self.l == other.l and self.r == other.r and self.agent_in == other.agent_in
                and self.agent_out == other.agent_out and self.exprs == other.exprs
                and self.semantics == other.semantics and self.monic == other.monic)

    def __hash__(self):
        return hash((self.l, self.r))

    def __repr__(self):
        return f"RewriteRule({self.name or '?'}, {self.semantics})"

    @classmethod
    def build(cls, L: ACSet, K: ACSet, R: ACSet, l: Mapping[str, Sequence[int]],
              r: Mapping[str, Sequence[int]], agent_in=None, agent_out=None, exprs=None,
              **kw) -> "RewriteRule":
        """Assemble a rule from component lists; bindings are inferred.

        ``agent_in`` / ``agent_out`` are ``(shape, components)`` pairs.
        ``exprs`` values may be strings, parsed with :func:`parse_expr`.
        """
        lm = infer_morphism(K, L, l)
        rm = infer_morphism(K, R, r)
        a = infer_morphism(agent_in[0], L, agent_in[1]) if agent_in else None
        b = infer_morphism(agent_out[0], R, agent_out[1]) if agent_out else None
        parsed = {k: parse_expr(v) if isinstance(v, str) else v for k, v in (exprs or {}).items()}
        return cls(lm, rm, a, b, parsed, **kw)

    def from_k(self) -> Dict[int, Any]:
        """For each variable of ``R`` reached from ``K``: its value in ``L``."""
        out = {}
        for u, val in self.r.assignment.items():
            if isinstance(val, Var) and val.id not in out:
                out[val.id] = self.l.assignment.get(u, Var(u))
        return out


def validate_rule(rule: RewriteRule) -> List[str]:
    out = []
    if rule.semantics in KNOWN_UNSUPPORTED:
        out.append(f"{rule.semantics} rewriting is not supported (use DPO or SPO)")
    elif rule.semantics not in SUPPORTED:
        out.append(f"unknown semantics {rule.semantics!r}")
    if rule.l.dom != rule.r.dom:
        out.append("l and r have different domains")
    for name, f in (("l", rule.l), ("r", rule.r), ("agent_in", rule.agent_in),
                    ("agent_out", rule.agent_out)):
        if not is_natural(f):
            out.append(f"{name} is not natural")
    if any(len(set(c)) != len(c) for c in rule.l.components.values()):
        out.append("l is not monic")
    if rule.agent_in.cod != rule.L:
        out.append("agent_in does not land in L")
    if rule.agent_out.cod != rule.R:
        out.append("agent_out does not land in R")
    s = rule.L.schema
    var_kinds = {}
    for a, src, _ in s.attrs:
        for v in rule.L.attr(a):
            if isinstance(v, Var):
                var_kinds[v.id] = s.attr_kind(a)
    occurrences: Dict[int, int] = {}
    for a, src, _ in s.attrs:
        for v in rule.R.attr(a):
            if isinstance(v, Var):
                occurrences[v.id] = occurrences.get(v.id, 0) + 1
    for (a, q), e in rule.exprs.items():
        if a not in s.attr_names or not 0 <= q < rule.R.nparts(s.attr_src[a]):
            out.append(f"expression for unknown cell {a}[{q}]")
            continue
        cell = rule.R.attr(a)[q]
        if not isinstance(cell, Var) or occurrences.get(cell.id, 0) != 1:
            out.append(f"expression cell {a}[{q}] must hold a variable used nowhere else in R")
        try:
            k = expr_kind(e, var_kinds)
            if k != s.attr_kind(a):
                out.append(f"expression for {a}[{q}] has kind {k}, expected {s.attr_kind(a)}")
        except AttrExprError as err:
            out.append(f"expression for {a}[{q}]: {err}")
    from_k = rule.from_k()
    for a, src, _ in s.attrs:
        for q, v in enumerate(rule.R.attr(a)):
            if isinstance(v, Var) and v.id not in from_k and (a, q) not in rule.exprs:
                out.append(f"R variable v{v.id} at {a}[{q}] is neither preserved nor computed")
    return out


def invert_rule(rule: RewriteRule) -> RewriteRule:
    """The reversed span ``R <- K -> L`` with agents swapped (no expressions)."""
    return RewriteRule(rule.r, rule.l, rule.agent_out, rule.agent_in, {}, rule.semantics,
                       rule.monic, name=f"{rule.name}^-1")


# ---------------------------------------------------------------------------
# matching and application

@dataclass
class RewriteResult:
    world: ACSet
    pmap: PartialMap
    agent: ACSetMorphism
    comatch: ACSetMorphism


def gluing_ok(l: ACSetMorphism, m: ACSetMorphism) -> bool:
    if identified_parts(l, m):
        return False
    deleted, _ = deletion_sets(l, m)
    X = m.cod
    s = X.schema
    for h, src, tgt in s.homs:
        for y in deleted[tgt]:
            for x in X.preimage(h, y):
                if x not in deleted[src]:
                    return False
    return True


def find_matches(rule: RewriteRule, world: ACSet, agent: Optional[ACSetMorphism] = None
                 ) -> List[ACSetMorphism]:
    """Matches ``L -> world`` whose restriction along ``A -> L`` is ``agent``.

    Under DPO, matches violating the gluing condition are dropped, so an
    empty list means the rule cannot fire.
    """
    if agent is None:
        agent = initial_morphism(world)
    if agent.dom != rule.A:
        raise RuleError("agent shape does not match the rule's input shape")
    if agent.cod is not world and agent.cod != world:
        raise RuleError("agent does not land in the given world")
    forced: Dict[str, Dict[int, int]] = {}
    a = rule.agent_in
    for t in world.schema.tables:
        ft: Dict[int, int] = {}
        for p, q in enumerate(a.components[t]):
            x = agent.components[t][p]
            if ft.get(q, x) != x:
                return []
            ft[q] = x
        if ft:
            forced[t] = ft
    ms = homomorphisms(rule.L, world, monic=rule.monic, forced=forced)
    if rule.semantics == "DPO":
        ms = [m for m in ms if gluing_ok(rule.l, m)]
    return ms


def _instantiate_R(rule: RewriteRule, R: ACSet, exprs, from_k, m: ACSetMorphism) -> ACSet:
    if not R.vars() and not exprs:
        return R
    binding = m.assignment
    s = R.schema
    attrs = {}
    for a, src, _ in s.attrs:
        col = list(R.attr(a))
        kind = s.attr_kind(a)
        for q, v in enumerate(col):
            if (a, q) in exprs:
                val = eval_attr_expr(exprs[(a, q)], binding)
            elif isinstance(v, Var):
                if v.id not in from_k:
                    raise RuleError(f"R variable v{v.id} has no value")
                val = m.subst(from_k[v.id])
            else:
                continue
            if isinstance(val, Var) or not value_kind_ok(val, kind):
                raise AttrExprError(f"value {val!r} for {a} is not of kind {kind}")
            col[q] = val
        attrs[a] = col
    return R.replace(attrs=attrs)


def _glue(m, k, d, K, r, R, exprs, from_k, b, rule):
    """Glue the instantiated replacement onto the context ``D``."""
    D = k.cod
    world = d.cod
    s = D.schema
    Rg = _instantiate_R(rule, R, exprs, from_k, m)
    if s.attrs and K.total_parts():
        # free every attribute cell touched by K so R may overwrite it
        base = max(D.vars(), default=-1) + 1
        k_cells: Dict[Tuple[str, int], Var] = {}
        d_attrs = {}
        k_attrs = {}
        nk = 0
        for a, src, _ in s.attrs:
            kc = k.components[src]
            if not kc:
                continue
            dcol = list(D.attr(a))
            kcol = []
            for p, x in enumerate(kc):
                key = (a, x)
                if key not in k_cells:
                    k_cells[key] = Var(base + len(k_cells))
                    dcol[x] = k_cells[key]
                kcol.append(Var(nk))
                nk += 1
            d_attrs[a] = dcol
            k_attrs[a] = kcol
        Kf = K.replace(attrs=k_attrs)
        Df = D.replace(attrs=d_attrs)
        kf_assign, rf_assign = {}, {}
        for a, kcol in k_attrs.items():
            src = s.attr_src[a]
            kc, rc = k.components[src], r.components[src]
            rcol = Rg.attr(a)
            for p, v in enumerate(kcol):
                kf_assign[v.id] = k_cells[(a, kc[p])]
                rf_assign[v.id] = rcol[rc[p]]
        kf = ACSetMorphism(Kf, Df, k.components, kf_assign)
        rf = ACSetMorphism(Kf, Rg, r.components, rf_assign)
    else:
        kf = k
        rf = ACSetMorphism(K, Rg, r.components)
    P, pd, pr = pushout(kf, rf)
    comps = {}
    for t in s.tables:
        dc, pc = d.components[t], pd.components[t]
        n = world.nparts(t)
        if len(dc) == n:
            comps[t] = tuple(pc)
        else:
            col = [None] * n
            for i, x in enumerate(dc):
                col[x] = pc[i]
            comps[t] = tuple(col)
    pm = PartialMap(world, P, comps, {v: pd.subst(Var(v)) for v in world.vars()})
    comatch = infer_morphism(R, P, pr.components, check=False)
    agent = compose(b, comatch)
    return RewriteResult(P, pm, agent, comatch)


def apply_dpo(rule: RewriteRule, m: ACSetMorphism) -> RewriteResult:
    """Double-pushout rewrite at match ``m``."""
    k, d = pushout_complement(rule.l, m)
    return _glue(m, k, d, rule.K, rule.r, rule.R, rule.exprs, rule.from_k(), rule.agent_out, rule)


def deletion_closure(X: ACSet, seeds: Mapping[str, set]) -> Dict[str, set]:
    """``seeds`` plus every part that refers (transitively) to a seed."""
    s = X.schema
    deleted = {t: set(seeds.get(t, ())) for t in s.tables}
    work = [(t, y) for t in s.tables for y in deleted[t]]
    while work:
        t, y = work.pop()
        for h in s.homs_in[t]:
            src = s.hom_src[h]
            for x in X.preimage(h, y):
                if x not in deleted[src]:
                    deleted[src].add(x)
                    work.append((src, x))
    return deleted


def apply_spo(rule: RewriteRule, m: ACSetMorphism) -> RewriteResult:
    """Single-pushout rewrite: deletion cascades to dependent parts.

    When the match identifies a deleted part with a preserved one,
    deletion wins; the affected interface parts and their images in ``R``
    are dropped as well.
    """
    X = m.cod
    s = X.schema
    deleted, kept = deletion_sets(rule.l, m)
    deleted = deletion_closure(X, deleted)
    K, R = rule.K, rule.R
    k_del = {t: {p for p, q in enumerate(rule.l.components[t])
                 if m.components[t][q] in deleted[t]} for t in s.tables}
    if any(k_del.values()):
        K2, kinc = restrict(K, k_del)
        r_seed = {t: {rule.r.components[t][p] for p in k_del[t]} for t in s.tables}
        r_del = deletion_closure(R, r_seed)
        R2, rinc = restrict(R, r_del)
        rinv = {t: {x: i for i, x in enumerate(rinc.components[t])} for t in s.tables}
        l2 = compose(kinc, rule.l)
        r2 = infer_morphism(K2, R2, {t: [rinv[t][rule.r.components[t][p]]
                                         for p in kinc.components[t]] for t in s.tables})
        try:
            b2 = infer_morphism(rule.B, R2, {t: [rinv[t][x] for x in rule.agent_out.components[t]]
                                             for t in s.tables})
        except KeyError:
            raise RuleError("SPO cascade deleted the output agent") from None
        exprs = {}
        for (a, q), e in rule.exprs.items():
            t = s.attr_src[a]
            if q in rinv[t]:
                exprs[(a, rinv[t][q])] = e
        rule2 = RewriteRule(l2, r2, None, b2, exprs, "SPO", rule.monic, rule.name)
        from_k = rule2.from_k()
        K, R, r, b, l = K2, R2, r2, b2, l2
    else:
        exprs, from_k, r, b, l = rule.exprs, rule.from_k(), rule.r, rule.agent_out, rule.l
    D, d = restrict(X, deleted)
    comps = {}
    for t in s.tables:
        inv = {x: i for i, x in enumerate(d.components[t])} if deleted[t] else None
        col = [m.components[t][q] for q in l.components[t]]
        comps[t] = [inv[x] for x in col] if inv is not None else col
    k = ACSetMorphism(K, D, comps, {u: m.subst(val) for u, val in l.assignment.items()})
    return _glue(m, k, d, K, r, R, exprs, from_k, b, rule)


def apply_rule(rule: RewriteRule, m: ACSetMorphism) -> RewriteResult:
    if rule.semantics == "DPO":
        return apply_dpo(rule, m)
    if rule.semantics == "SPO":
        return apply_spo(rule, m)
    raise UnsupportedSemantics(f"{rule.semantics} rewriting is not supported")


def rewrite(rule: RewriteRule, world: ACSet, agent: Optional[ACSetMorphism] = None,
            index: int = 0) -> Optional[RewriteResult]:
    """Apply ``rule`` at its ``index``-th match, or return ``None``."""
    ms = find_matches(rule, world, agent)
    if not ms:
        return None
    return apply_rule(rule, ms[index])
