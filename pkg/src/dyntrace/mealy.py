"""Effectful Mealy machines and their operations.

A machine maps ``(state, token)`` to an :class:`~dyntrace.effects.Effect`
of ``(state', token')``.  A token is a ``(port, payload)`` pair; the port
says which summand of the input or output coproduct the value lives in.
The tensor and copairing tag ports as ``(0, p)`` / ``(1, q)``, so a trace
always feeds back the outputs tagged ``1``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .effects import (DIST, LIST, MAYBE, TOL, Effect, EffectKind, bind, dist, fmap, from_list,
                      pure, throw)

Token = Tuple[Hashable, Any]

DEFAULT_FUEL = 10_000


class AlphabetMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MealyMachine:
    """``inputs`` and ``outputs`` list port labels; ``step`` is the transition."""

    inputs: Tuple[Hashable, ...]
    outputs: Tuple[Hashable, ...]
    s0: Any
    step: Callable[[Any, Token], Effect]
    kind: EffectKind
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def __repr__(self):
        return f"MealyMachine({self.name or '?'}: {list(self.inputs)} -> {list(self.outputs)})"

    def run(self, tokens: Sequence[Token], state=None) -> Effect:
        """Feed ``tokens`` in order; the effect of (final state, outputs)."""
        e = pure(self.kind, (self.s0 if state is None else state, ()))

        for tok in tokens:
            def k(acc, tok=tok):
                s, outs = acc
                return fmap(self.step(s, tok), lambda r: (r[0], outs + (r[1],)))
            e = bind(e, k)
        return e


def _check_port(m: MealyMachine, tok: Token):
    if tok[0] not in m.inputs:
        raise AlphabetMismatch(f"{m!r} has no input port {tok[0]!r}")


def machine(inputs, outputs, s0, table: Dict[Tuple[Any, Hashable], Effect], kind: EffectKind,
            name: str = "") -> MealyMachine:
    """A machine given by a finite transition table keyed ``(state, port)``.

    Table values are effects of ``(state', out_port)``; payloads are
    passed through unchanged.
    """
    def step(s, tok):
        port, x = tok
        return fmap(table[(s, port)], lambda r: (r[0], (r[1], x)))
    return MealyMachine(inputs, outputs, s0, step, kind, name)


def compose(m1: MealyMachine, m2: MealyMachine) -> MealyMachine:
    """Sequential composite; its state is the pair of states."""
    if set(m1.outputs) != set(m2.inputs):
        raise AlphabetMismatch(f"cannot compose {m1!r} with {m2!r}")
    if m1.kind is not m2.kind:
        raise AlphabetMismatch("machines use different effect kinds")
    kind = m1.kind

    def step(st, a):
        s, t = st

        def after_first(r1):
            s2, b = r1
            return fmap(m2.step(t, b), lambda r2: ((s2, r2[0]), r2[1]))
        return bind(m1.step(s, a), after_first)
    return MealyMachine(m1.inputs, m2.outputs, (m1.s0, m2.s0), step, kind,
                        f"({m1.name};{m2.name})")


def tensor(m1: MealyMachine, m2: MealyMachine) -> MealyMachine:
    """Parallel sum: tokens tagged 0 go to ``m1``, tagged 1 to ``m2``."""
    if m1.kind is not m2.kind:
        raise AlphabetMismatch("machines use different effect kinds")

    def step(st, tok):
        (tag, p), x = tok
        s, t = st
        if tag == 0:
            return fmap(m1.step(s, (p, x)), lambda r: ((r[0], t), ((0, r[1][0]), r[1][1])))
        return fmap(m2.step(t, (p, x)), lambda r: ((s, r[0]), ((1, r[1][0]), r[1][1])))
    return MealyMachine(_tag(m1.inputs, m2.inputs), _tag(m1.outputs, m2.outputs),
                        (m1.s0, m2.s0), step, m1.kind, f"({m1.name}+{m2.name})")


def _tag(ps, qs):
    return tuple((0, p) for p in ps) + tuple((1, q) for q in qs)


def copair(f: MealyMachine, g: MealyMachine) -> MealyMachine:
    """``[f, g]``: input tag selects which machine steps; outputs shared."""
    if set(f.outputs) != set(g.outputs):
        raise AlphabetMismatch("copair needs a shared output alphabet")
    if f.kind is not g.kind:
        raise AlphabetMismatch("machines use different effect kinds")

    def step(st, tok):
        (tag, p), x = tok
        s, t = st
        if tag == 0:
            return fmap(f.step(s, (p, x)), lambda r: ((r[0], t), r[1]))
        return fmap(g.step(t, (p, x)), lambda r: ((s, r[0]), r[1]))
    return MealyMachine(_tag(f.inputs, g.inputs), f.outputs, (f.s0, g.s0), step, f.kind,
                        f"[{f.name},{g.name}]")


def port_map(inputs, outputs, fn: Callable[[Hashable], Hashable], kind: EffectKind,
             name: str = "route") -> MealyMachine:
    """Stateless pure machine relabelling ports by ``fn``; payloads untouched."""
    outs = set(outputs)

    def step(s, tok):
        q = fn(tok[0])
        if q not in outs:
            raise AlphabetMismatch(f"{name}: port {tok[0]!r} routed to unknown {q!r}")
        return pure(kind, (s, (q, tok[1])))
    return MealyMachine(inputs, outputs, (), step, kind, name)


def structural(which: str, kind: EffectKind, left=(), right=(), side: int = 0) -> MealyMachine:
    """Identity, symmetry, codiagonal and injection machines.

    ``identity``: ``left -> left``; ``symmetry``: ``left+right -> right+left``;
    ``codiagonal``: ``left+left -> left``; ``injection``: ``left -> left+right``
    into summand ``side``.
    """
    left, right = tuple(left), tuple(right)
    if which == "identity":
        return port_map(left, left, lambda p: p, kind, "id")
    if which == "symmetry":
        return port_map(_tag(left, right), _tag(right, left), lambda p: (1 - p[0], p[1]), kind,
                        "swap")
    if which == "codiagonal":
        return port_map(_tag(left, left), left, lambda p: p[1], kind, "merge")
    if which == "injection":
        src = left if side == 0 else right
        return port_map(src, _tag(left, right), lambda p: (side, p), kind, f"inj{side + 1}")
    raise ValueError(f"unknown structural machine {which!r}")


def empty_machine(kind: EffectKind) -> MealyMachine:
    def step(s, tok):
        raise AlphabetMismatch("the empty machine has no inputs")
    return MealyMachine((), (), (), step, kind, "0")


def trace(m: MealyMachine, fuel: int = DEFAULT_FUEL) -> MealyMachine:
    """Feedback of the outputs tagged ``1`` into the inputs tagged ``1``.

    Each feedback costs one unit of fuel.  Running out yields the
    exception.  Under ``LIST``/``DIST`` every branch is followed; one
    exception on any branch makes the step exceptional.  States and
    tokens must be hashable (feedback results are memoised).
    """
    if fuel < 1:
        raise ValueError("fuel must be positive")
    a_in = tuple(p[1] for p in m.inputs if p[0] == 0)
    b_out = tuple(p[1] for p in m.outputs if p[0] == 0)
    kind = m.kind

    def step(s, tok):
        return _feedback(m, s, ((0, tok[0]), tok[1]), fuel)
    return MealyMachine(a_in, b_out, m.s0, step, kind, f"Tr({m.name})")


def _feedback(m, s, tok, fuel):
    kind = m.kind
    if kind is MAYBE:
        rem = fuel
        while True:
            e = m.step(s, tok)
            if e.raised:
                return e
            s, (port, y) = e.values[0]
            if port[0] == 0:
                return pure(kind, (s, (port[1], y)))
            if rem == 0:
                return throw(kind)
            rem -= 1
            tok = ((1, port[1]), y)
    memo: Dict[tuple, Effect] = {}
    steps: Dict[tuple, Effect] = {}
    root = (s, tok, fuel)
    stack = [root]
    while stack:
        key = stack[-1]
        if key in memo:
            stack.pop()
            continue
        s, tok, rem = key
        e = steps.get((s, tok))
        if e is None:
            e = m.step(s, tok)
            steps[(s, tok)] = e
        if e.raised:
            # every key on the stack is reachable from the root
            return throw(kind)
        pending = []
        for s2, (port, y) in e.values:
            if port[0] == 1:
                if rem == 0:
                    return throw(kind)
                child = (s2, ((1, port[1]), y), rem - 1)
                if child not in memo:
                    pending.append(child)
        if pending:
            stack.extend(reversed(pending))
            continue

        def cont(r, rem=rem):
            s2, (port, y) = r
            if port[0] == 0:
                return pure(kind, (s2, (port[1], y)))
            return memo[(s2, ((1, port[1]), y), rem - 1)]
        memo[key] = bind(e, cont)
        stack.pop()
    return memo[root]


# ---------------------------------------------------------------------------
# behaviour

@dataclass(frozen=True)
class BehaviorTree:
    """Finite unrolling: for each input token, an effect of ``(output, subtree)``."""

    children: Tuple[Tuple[Token, Effect], ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def depth(self) -> int:
        d = 0
        for _, e in self.children:
            for _, (o, t) in e.branches():
                d = max(d, 1 + t.depth())
        return d if self.children else 0


def behavior_tree(m: MealyMachine, depth: int, inputs: Sequence[Token], state=None
                  ) -> BehaviorTree:
    s = m.s0 if state is None else state
    if depth <= 0:
        return BehaviorTree()
    kids = []
    for a in inputs:
        e = fmap(m.step(s, a), lambda r: (r[1], behavior_tree(m, depth - 1, inputs, r[0])))
        kids.append((a, e))
    return BehaviorTree(tuple(kids))


def trees_equal(t1: BehaviorTree, t2: BehaviorTree, tol: float = TOL) -> bool:
    from .effects import effects_equal
    if len(t1.children) != len(t2.children):
        return False
    for (a1, e1), (a2, e2) in zip(t1.children, t2.children):
        if a1 != a2:
            return False
        if not effects_equal(e1, e2, lambda x, y: x[0] == y[0] and trees_equal(x[1], y[1], tol),
                             tol):
            return False
    return True


def all_tokens(m: MealyMachine, payloads: Sequence[Any] = (None,)) -> List[Token]:
    return [(p, x) for p in m.inputs for x in payloads]


class _Bisim:
    """Depth-bounded behavioural equality of two machines, memoised."""

    def __init__(self, m1, m2, inputs, tol):
        self.ms = (m1, m2)
        self.inputs = inputs
        self.tol = tol
        self.memo: Dict[tuple, bool] = {}
        self.steps: Dict[tuple, Effect] = {}

    def step(self, node, a):
        key = (node, a)
        e = self.steps.get(key)
        if e is None:
            side, s = node
            e = self.ms[side].step(s, a)
            self.steps[key] = e
        return e

    def eq(self, n1, n2, k) -> bool:
        if k == 0 or n1 == n2:
            return True
        key = (n1, n2, k)
        r = self.memo.get(key)
        if r is None:
            r = all(self._eq_effect(self.step(n1, a), self.step(n2, a), n1[0], n2[0], k)
                    for a in self.inputs)
            self.memo[key] = r
        return r

    def _eq_effect(self, e1, e2, side1, side2, k):
        if e1.raised or e2.raised:
            return e1.raised and e2.raised
        if e1.kind is not DIST:
            if len(e1.values) != len(e2.values):
                return False
            return all(o1 == o2 and self.eq((side1, s1), (side2, s2), k - 1)
                       for (s1, o1), (s2, o2) in zip(e1.values, e2.values))
        classes: List[list] = []
        for col, side, e in ((1, side1, e1), (2, side2, e2)):
            for w, (s, o) in zip(e.weights, e.values):
                node = (side, s)
                for c in classes:
                    if c[0] == o and self.eq(c[1], node, k - 1):
                        c[col + 1] += w
                        break
                else:
                    row = [o, node, 0.0, 0.0]
                    row[col + 1] = w
                    classes.append(row)
        return all(abs(c[2] - c[3]) <= self.tol for c in classes)


def behaviorally_equal(m1: MealyMachine, m2: MealyMachine, depth: int,
                       inputs: Optional[Sequence[Token]] = None, tol: float = TOL) -> bool:
    """Whether the depth-``depth`` behaviour trees agree.

    Equivalent to comparing :func:`behavior_tree` outputs with
    :func:`trees_equal`, but shares work between equal subtrees.
    """
    if set(m1.inputs) != set(m2.inputs) or set(m1.outputs) != set(m2.outputs):
        raise AlphabetMismatch(f"{m1!r} and {m2!r} have different alphabets")
    if m1.kind is not m2.kind:
        raise AlphabetMismatch("machines use different effect kinds")
    inputs = list(inputs) if inputs is not None else all_tokens(m1)
    return _Bisim(m1, m2, inputs, tol).eq((0, m1.s0), (1, m2.s0), depth)


# ---------------------------------------------------------------------------
# the two-state trap of the running example

TRAP_STATES = ("T", "N")


def trap(kind: EffectKind = MAYBE) -> MealyMachine:
    """Inputs U (unaware) / A (aware); outputs C (caught), A, U.

    T --U/C--> T, T --A/A--> N, N --U/U--> T, N --A/U--> N.
    """
    table = {("T", "U"): ("T", "C"), ("T", "A"): ("N", "A"),
             ("N", "U"): ("T", "U"), ("N", "A"): ("N", "U")}
    return machine(("U", "A"), ("C", "A", "U"), "T",
                   {k: pure(kind, v) for k, v in table.items()}, kind, "Trap")


def trap2(kind: EffectKind = MAYBE) -> MealyMachine:
    """Two traps in a row; alert pieces leaving the first skip the second.

    Built as ``Trap ; route ; (Trap + id) ; merge``.  Use
    :func:`trap2_components` to read the pair of trap states.
    """
    t = trap(kind)
    route = port_map(("C", "A", "U"), ((0, "U"), (0, "A"), (1, "A"), (1, "C")),
                     lambda p: (0, "U") if p == "U" else (1, p), kind, "route")
    middle = tensor(trap(kind), structural("identity", kind, ("A", "C")))
    merge = port_map(middle.outputs, ("U", "A", "C"), lambda p: p[1], kind, "merge")
    m = compose(compose(compose(t, route), middle), merge)
    return MealyMachine(m.inputs, m.outputs, m.s0, m.step, kind, "Trap2")


def trap2_components(state) -> Tuple[str, str]:
    (((s1, _), (s2, _)), _) = state
    return s1, s2


def trap2_state(s1: str, s2: str):
    """The composite state whose two traps are in ``s1`` and ``s2``."""
    return (((s1, ()), (s2, ())), ())


def trap2_states() -> List[Any]:
    """The full product state space of :func:`trap2`, reachable or not."""
    return [trap2_state(a, b) for a in TRAP_STATES for b in TRAP_STATES]


def reachable_states(m: MealyMachine, inputs: Optional[Sequence[Token]] = None,
                     limit: int = 100_000) -> List[Any]:
    """States reachable from ``s0`` (breadth first, hashable states only)."""
    inputs = list(inputs) if inputs is not None else all_tokens(m)
    seen = {m.s0: None}
    frontier = [m.s0]
    while frontier and len(seen) < limit:
        nxt = []
        for s in frontier:
            for a in inputs:
                for _, (s2, _) in m.step(s, a).branches():
                    if s2 not in seen:
                        seen[s2] = None
                        nxt.append(s2)
        frontier = nxt
    return list(seen)


# ---------------------------------------------------------------------------
# random machines for law testing

def random_machine(rng: random.Random, kind: EffectKind, inputs, outputs, nstates: int = 3,
                   p_exc: float = 0.05, p_branch: float = 0.3, name: str = "") -> MealyMachine:
    """A table machine with random transitions over ``nstates`` integer states."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    table = {}
    for s in range(nstates):
        for a in inputs:
            table[(s, a)] = _random_effect(rng, kind, nstates, outputs, p_exc, p_branch)
    return machine(inputs, outputs, 0, table, kind, name or f"rand{rng.randrange(10 ** 6)}")


def _random_effect(rng, kind, nstates, outputs, p_exc, p_branch):
    if rng.random() < p_exc:
        return throw(kind)

    def outcome():
        return (rng.randrange(nstates), rng.choice(outputs))
    if kind is MAYBE:
        return pure(kind, outcome())
    n = 2 if rng.random() < p_branch else 1
    if kind is LIST:
        if rng.random() < p_exc:
            return from_list([])
        return from_list([outcome() for _ in range(n)])
    return dist([(rng.uniform(0.1, 1.0), outcome()) for _ in range(n)], normalize=True)
