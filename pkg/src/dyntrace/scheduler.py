"""Wiring-diagram schedules of rewrite primitives and their interpreter.

A schedule is a set of named boxes plus wires.  A wire goes from a
source (an outer input or a box out-port) to a target (a box in-port or
an outer output); sources are written ``(box, port)`` with ``OUTER`` as
the box name for the outer interface.  Every source feeds exactly one
target, while a target may collect many sources.

:func:`run` passes a trajectory token along the wires.  Under the list
and distribution monads the whole configuration (token plus every box's
local state) forks at each branching step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .colimits import (AttributeConflict, GluingViolation, PartialMap, compose_partial,
                       initial_acset, initial_morphism, push_forward, pushout)
from .effects import (DIST, LIST, MAYBE, RAISED, Effect, EffectKind, choice, dist, empty,
                      fmap, from_list, pure, sample, spawn_states, throw)
from .mealy import MealyMachine, compose as m_compose, port_map, tensor, structural
from .rewriting import (AttrExprError, RewriteRule, RuleError, apply_rule, eval_attr_expr,
                        find_matches, parse_expr, validate_rule)
from .schema import ACSet, ACSetMorphism, SchemaError, compose, homomorphisms, is_natural
from .trajectory import Trajectory

log = logging.getLogger(__name__)

OUTER = "_"
DEFAULT_FUEL = 10_000
BRANCH_CAP = 10_000

Endpoint = Tuple[str, str]


class ScheduleError(ValueError):
    pass


class QueryMisuse(RuntimeError):
    """A Query box was re-entered on ``C`` with nothing queued."""


# ---------------------------------------------------------------------------
# generators

@dataclass(eq=False)
class Rewrite:
    rule: RewriteRule

    def in_ports(self):
        return {"in": self.rule.A}

    def out_ports(self):
        return {"success": self.rule.B, "fail": self.rule.A}


@dataclass(eq=False)
class Weaken:
    """``f: B -> A``; the new agent is ``f ; agent``."""

    f: ACSetMorphism

    def in_ports(self):
        return {"in": self.f.cod}

    def out_ports(self):
        return {"out": self.f.dom}


@dataclass(eq=False)
class Strengthen:
    """``f: A -> B``; glue ``B`` onto the world along the agent."""

    f: ACSetMorphism

    def in_ports(self):
        return {"in": self.f.dom}

    def out_ports(self):
        return {"out": self.f.cod}


@dataclass(eq=False)
class Init:
    """Jump to world ``a0.cod`` with agent ``a0``, forgetting the old world."""

    a0: ACSetMorphism
    in_shape: ACSet

    def in_ports(self):
        return {"in": self.in_shape}

    def out_ports(self):
        return {"out": self.a0.dom}


@dataclass(eq=False)
class Fail:
    shape: ACSet
    mode: str = "exception"  # or "empty" (list monad only)

    def in_ports(self):
        return {"in": self.shape}

    def out_ports(self):
        return {}


@dataclass(frozen=True)
class AgentTest:
    """Serializable ControlFlow predicate: port 1 when ``expr`` holds, else 2.

    ``expr`` is an attribute expression over the variables of the current
    agent's domain, read through the agent's assignment.
    """

    expr: str

    def __post_init__(self):
        parse_expr(self.expr)

    def __call__(self, traj: Trajectory) -> int:
        value = eval_attr_expr(parse_expr(self.expr), traj.agent.assignment)
        if type(value) is not bool:
            raise AttrExprError(f"predicate {self.expr!r} is not boolean")
        return 1 if value else 2


@dataclass(eq=False)
class ControlFlow:
    """Route to one of ``n`` identical out-ports ``"1"`` .. ``"n"``.

    Either ``weights`` (non-negative, normalised on use) or ``predicate``
    (trajectory -> port number, 1-based) must be given.
    """

    shape: ACSet
    n: int = 2
    weights: Optional[Sequence[float]] = None
    predicate: Optional[Callable[[Trajectory], int]] = None
    label: str = ""

    def __post_init__(self):
        if self.weights is not None:
            self.weights = tuple(float(w) for w in self.weights)
            self.n = len(self.weights)

    def in_ports(self):
        return {"in": self.shape}

    def out_ports(self):
        return {str(i + 1): self.shape for i in range(self.n)}


@dataclass(eq=False)
class Query:
    A: ACSet
    B: ACSet
    C: ACSet

    def in_ports(self):
        return {"A": self.A, "C": self.C}

    def out_ports(self):
        return {"A": self.A, "B": self.B, "0": initial_acset(self.A.schema)}


Generator = Union[Rewrite, Weaken, Strengthen, Init, Fail, ControlFlow, Query]


@dataclass(eq=False)
class QueryState:
    """Queued agents ``B -> world(entry)`` and the entry index.

    Agents are kept as found and pushed forward on readout; ``cache``
    remembers the composite partial map from ``entry`` to a later node.
    """

    queue: Tuple[ACSetMorphism, ...]
    entry: int
    cache: Any = None

    def __eq__(self, other):
        return (isinstance(other, QueryState) and self.entry == other.entry
                and self.queue == other.queue)

    def __hash__(self):
        return hash((self.entry, self.queue))


@dataclass(frozen=True)
class Exit:
    """A trajectory leaving the schedule through outer port ``port``."""

    port: str
    trajectory: Trajectory


# ---------------------------------------------------------------------------
# schedules

@dataclass(eq=False)
class Schedule:
    boxes: Dict[str, Generator]
    wires: List[Tuple[Endpoint, Endpoint]]
    inputs: Dict[str, ACSet]
    outputs: Dict[str, ACSet]
    name: str = ""

    def __post_init__(self):
        self.boxes = dict(self.boxes)
        self.wires = [(tuple(a), tuple(b)) for a, b in self.wires]
        self.inputs = dict(self.inputs)
        self.outputs = dict(self.outputs)
        self._targets = None

    @property
    def schema(self):
        for shape in list(self.inputs.values()) + list(self.outputs.values()):
            return shape.schema
        for b in self.boxes.values():
            for shape in b.in_ports().values():
                return shape.schema
        return None

    def target(self, src: Endpoint) -> Endpoint:
        if self._targets is None:
            self._targets = {}
            for a, b in self.wires:
                self._targets.setdefault(a, b)
        try:
            return self._targets[src]
        except KeyError:
            raise ScheduleError(f"no wire leaves {src[0]}.{src[1]}") from None

    def box_names(self) -> List[str]:
        return list(self.boxes)


def source_shape(s: Schedule, src: Endpoint) -> Optional[ACSet]:
    box, port = src
    if box == OUTER:
        return s.inputs.get(port)
    g = s.boxes.get(box)
    return None if g is None else g.out_ports().get(port)


def target_shape(s: Schedule, tgt: Endpoint) -> Optional[ACSet]:
    box, port = tgt
    if box == OUTER:
        return s.outputs.get(port)
    g = s.boxes.get(box)
    return None if g is None else g.in_ports().get(port)


def _generator_violations(name: str, g) -> List[str]:
    out = []
    if isinstance(g, Rewrite):
        out += [f"box {name}: {v}" for v in validate_rule(g.rule)]
    elif isinstance(g, (Weaken, Strengthen)):
        if not is_natural(g.f):
            out.append(f"box {name}: map is not natural")
    elif isinstance(g, Init):
        if not is_natural(g.a0):
            out.append(f"box {name}: initial agent is not natural")
        if not g.a0.cod.is_ground():
            out.append(f"box {name}: initial world is not ground")
    elif isinstance(g, Fail):
        if g.mode not in ("exception", "empty"):
            out.append(f"box {name}: unknown fail mode {g.mode!r}")
    elif isinstance(g, ControlFlow):
        if g.n < 1:
            out.append(f"box {name}: needs at least one out-port")
        if (g.weights is None) == (g.predicate is None):
            out.append(f"box {name}: give exactly one of weights or predicate")
        if g.weights is not None and (any(w < 0 for w in g.weights) or sum(g.weights) <= 0):
            out.append(f"box {name}: weights must be non-negative with positive sum")
    elif isinstance(g, Query):
        pass
    else:
        out.append(f"box {name}: unknown generator {type(g).__name__}")
    return out


def typecheck(s: Schedule) -> List[str]:
    """Violations of the wiring and shape constraints (empty when well typed)."""
    out = []
    schema = s.schema
    if OUTER in s.boxes:
        out.append(f"box name {OUTER!r} is reserved")
    seen: Dict[Endpoint, Endpoint] = {}
    for src, tgt in s.wires:
        a, b = source_shape(s, src), target_shape(s, tgt)
        if a is None:
            out.append(f"wire source {src[0]}.{src[1]} does not exist")
        if b is None:
            out.append(f"wire target {tgt[0]}.{tgt[1]} does not exist")
        if src in seen:
            out.append(f"source {src[0]}.{src[1]} feeds more than one target")
        seen[src] = tgt
        if a is not None and b is not None and a != b:
            out.append(f"wire {src[0]}.{src[1]} -> {tgt[0]}.{tgt[1]} joins different agent shapes")
    sources = [(OUTER, p) for p in s.inputs]
    for name, g in s.boxes.items():
        sources += [(name, p) for p in g.out_ports()]
        out += _generator_violations(name, g)
        for shape in list(g.in_ports().values()) + list(g.out_ports().values()):
            if schema is not None and shape.schema != schema:
                out.append(f"box {name}: shapes use a different schema")
    for src in sources:
        if src not in seen:
            out.append(f"source {src[0]}.{src[1]} is not wired")
    return out


def is_acyclic(s: Schedule) -> bool:
    try:
        _topo_order(s)
        return True
    except ScheduleError:
        return False


def _topo_order(s: Schedule) -> List[str]:
    succ = {b: set() for b in s.boxes}
    indeg = {b: 0 for b in s.boxes}
    for (a, _), (b, _) in s.wires:
        if a != OUTER and b != OUTER and b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    order = []
    ready = [b for b in s.boxes if indeg[b] == 0]
    while ready:
        b = ready.pop(0)
        order.append(b)
        for c in sorted(succ[b], key=list(s.boxes).index):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(order) != len(s.boxes):
        raise ScheduleError("schedule has a feedback loop")
    return order


# ---------------------------------------------------------------------------
# generator semantics

def query_update_a(g: Query, traj: Trajectory) -> QueryState:
    return QueryState(tuple(homomorphisms(g.B, traj.last())), traj.length())


def _pushed(state: QueryState, traj: Trajectory, f: ACSetMorphism) -> Optional[ACSetMorphism]:
    """``postcompose(traj, f, entry)`` reusing (and refreshing) the state's cache."""
    n = traj.length()
    if n == state.entry:
        return f
    cache = state.cache
    start_pm = None
    start = state.entry
    if cache is not None:
        node, pm = cache
        try:
            if traj._node(node.index) is node:
                start, start_pm = node.index, pm
        except IndexError:
            pass
    links = []
    head = traj._node(n)
    cur = head
    while cur.index > start:
        links.append(cur.link)
        cur = cur.prev
    pm = start_pm
    for q in reversed(links):
        pm = q if pm is None else compose_partial(pm, q)
    if pm is None:
        return f
    state.cache = (head, pm)
    return push_forward(f, pm)


def query_update_c(state: QueryState, traj: Trajectory) -> QueryState:
    if state is None:
        raise QueryMisuse("Query entered on C before it was entered on A")
    if not state.queue:
        raise QueryMisuse("Query re-entered on C with an empty queue")
    rest = tuple(b for b in state.queue[1:] if _pushed(state, traj, b) is not None)
    return QueryState(rest, state.entry, state.cache)


def query_readout(g: Query, state: QueryState, traj: Trajectory) -> Tuple[str, Trajectory]:
    if state.queue:
        b = _pushed(state, traj, state.queue[0])
        return "B", traj.extend(b)
    p = _pushed(state, traj, traj.get(state.entry))
    if p is not None:
        return "A", traj.extend(p)
    return "0", traj.extend(initial_morphism(traj.last()))


def _rewrite_outcome(rule, m, traj):
    res = apply_rule(rule, m)
    return "success", traj.extend_with(res.pmap, res.agent)


_SOFT_ERRORS = (AttrExprError, RuleError, AttributeConflict, GluingViolation, SchemaError)


def generator_step(g: Generator, state, port: str, traj: Trajectory, kind: EffectKind
                   ) -> Effect:
    """One box step: an effect of ``(state', out_port, trajectory')``.

    Errors raised by rule application become the exception of ``kind``;
    malformed use of a Query box raises :class:`QueryMisuse`.
    """
    if isinstance(g, Rewrite):
        rule = g.rule
        try:
            ms = find_matches(rule, traj.last(), traj.agent)
        except _SOFT_ERRORS as e:
            log.debug("rewrite failed: %s", e)
            return throw(kind)
        if not ms:
            return pure(kind, (state, "fail", traj.extend(traj.agent)))
        chosen = ms[:1] if kind is MAYBE else ms
        outs = []
        for m in chosen:
            try:
                p, t2 = _rewrite_outcome(rule, m, traj)
            except _SOFT_ERRORS as e:
                log.debug("rewrite failed: %s", e)
                return throw(kind)
            outs.append((state, p, t2))
        return choice(kind, outs)
    if isinstance(g, Weaken):
        return pure(kind, (state, "out", traj.extend(compose(g.f, traj.agent))))
    if isinstance(g, Strengthen):
        try:
            # world first, so existing parts keep their indices
            P, px, pb = pushout(traj.agent, g.f)
        except AttributeConflict:
            return throw(kind)
        if not P.is_ground():
            return throw(kind)
        return pure(kind, (state, "out", traj.extend_with(PartialMap.total(px), pb)))
    if isinstance(g, Init):
        return pure(kind, (state, "out",
                           traj.extend_with(PartialMap.empty(traj.last(), g.a0.cod), g.a0)))
    if isinstance(g, Fail):
        if g.mode == "empty" and kind is LIST:
            return empty(kind)
        return throw(kind)
    if isinstance(g, ControlFlow):
        ports = [str(i + 1) for i in range(g.n)]
        if g.predicate is not None:
            try:
                k = g.predicate(traj)
            except AttrExprError as e:
                log.debug("predicate failed: %s", e)
                return throw(kind)
            if not 1 <= int(k) <= g.n:
                return throw(kind)
            return pure(kind, (state, str(int(k)), traj))
        if kind is MAYBE:
            eff = dist(zip(g.weights, ports), normalize=True)
            choice_port, rng = sample(eff, state)
            return pure(kind, (rng, choice_port, traj))
        live = [(w, p) for w, p in zip(g.weights, ports) if w > 0]
        return choice(kind, [(state, p, traj) for _, p in live], [w for w, _ in live])
    if isinstance(g, Query):
        if port == "A":
            st = query_update_a(g, traj)
        elif port == "C":
            st = query_update_c(state, traj)
        else:
            raise ScheduleError(f"Query has no in-port {port!r}")
        out, t2 = query_readout(g, st, traj)
        return pure(kind, (st, out, t2))
    raise ScheduleError(f"unknown generator {g!r}")


def initial_states(s: Schedule, seed: int) -> Tuple[Any, ...]:
    """Per-box local state: an RNG stream for ControlFlow boxes, else ``None``."""
    streams = spawn_states(seed, len(s.boxes) + 1)
    return tuple(streams[i] if isinstance(g, ControlFlow) else None
                 for i, g in enumerate(s.boxes.values()))


def path_stream(s: Schedule, seed: int):
    return spawn_states(seed, len(s.boxes) + 1)[-1]


# ---------------------------------------------------------------------------
# interpreter

@dataclass
class RunReport:
    seed: int
    kind: str
    mode: str
    fuel: int
    steps: List[dict] = field(default_factory=list)
    terminals: List[dict] = field(default_factory=list)
    fuel_used: int = 0
    tally: Dict[str, Dict[str, int]] = field(default_factory=dict)

    def count(self, box: str, port: str) -> int:
        return self.tally.get(box, {}).get(port, 0)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "monad": self.kind, "mode": self.mode, "fuel": self.fuel,
                "fuel_used": self.fuel_used, "tally": self.tally, "steps": self.steps,
                "terminals": self.terminals}


@dataclass
class RunResult:
    """``effect`` in exact mode; ``outcome`` (an :class:`Exit` or ``RAISED``) when sampling."""

    effect: Optional[Effect]
    outcome: Any
    report: RunReport


@dataclass
class _Config:
    states: Tuple[Any, ...]
    loc: Endpoint
    traj: Trajectory
    weight: float
    steps: int
    branch: str


def run(s: Schedule, t0: Trajectory, kind: EffectKind = MAYBE, seed: int = 0,
        fuel: int = DEFAULT_FUEL, mode: str = "exact", in_port: Optional[str] = None,
        log_steps: bool = True, branch_cap: int = BRANCH_CAP, check: bool = True) -> RunResult:
    """Execute ``s`` on ``t0`` entering at ``in_port``.

    ``fuel`` bounds the box-steps along each branch; running out is the
    exception.  Exact mode enumerates every branch (the report lists each
    terminal with its weight, exceptional ones included); sample mode
    follows one path drawn with the seeded generator.
    """
    kind = EffectKind.parse(kind)
    if mode not in ("exact", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sample" and kind is LIST:
        raise ValueError("the list monad has no distribution to sample from; use exact mode")
    if check:
        problems = typecheck(s)
        if problems:
            raise ScheduleError("; ".join(problems))
    if in_port is None:
        if len(s.inputs) != 1:
            raise ScheduleError("schedule has several inputs; name one")
        in_port = next(iter(s.inputs))
    if in_port not in s.inputs:
        raise ScheduleError(f"no outer input {in_port!r}")
    if t0.agent.dom != s.inputs[in_port]:
        raise ScheduleError("trajectory agent does not have the input shape")
    names = s.box_names()
    pos = {b: i for i, b in enumerate(names)}
    report = RunReport(seed, kind.value, mode, fuel)
    rng = path_stream(s, seed)
    stack = [_Config(initial_states(s, seed), s.target((OUTER, in_port)), t0, 1.0, 0, "0")]
    results: List[Tuple[float, Any, str]] = []
    live_peak = 1
    while stack:
        c = stack.pop()
        box, port = c.loc
        if box == OUTER:
            results.append((c.weight, Exit(port, c.traj), c.branch, c.steps))
            continue
        if c.steps >= fuel:
            results.append((c.weight, RAISED, c.branch, c.steps))
            continue
        i = pos[box]
        eff = generator_step(s.boxes[box], c.states[i], port, c.traj, kind)
        if eff.raised:
            if log_steps:
                report.steps.append(_log(c, box, port, None, c.traj, c.branch, c.weight))
            results.append((c.weight, RAISED, c.branch, c.steps + 1))
            continue
        branches = eff.branches()
        if mode == "sample" and len(branches) > 1:
            picked, rng = sample(eff, rng)
            branches = [(1.0, picked)]
        kids = []
        for j, (w, (st, out, t2)) in enumerate(branches):
            states = c.states[:i] + (st,) + c.states[i + 1:]
            br = c.branch if len(branches) == 1 else f"{c.branch}.{j}"
            weight = c.weight * w if kind is DIST else c.weight
            if log_steps:
                report.steps.append(_log(c, box, port, out, t2, br, weight))
            bt = report.tally.setdefault(box, {})
            bt[out] = bt.get(out, 0) + 1
            kids.append(_Config(states, s.target((box, out)), t2, weight, c.steps + 1, br))
        stack.extend(reversed(kids))
        live_peak = max(live_peak, len(stack))
        if len(stack) > branch_cap:
            report.terminals.append({"branch": "*", "outcome": "exception",
                                     "reason": "branch cap exceeded"})
            return RunResult(throw(kind) if mode == "exact" else None, RAISED, report)
    report.fuel_used = max((r[3] for r in results), default=0)
    for w, v, br, steps in results:
        entry = {"branch": br, "weight": w, "steps": steps}
        if v is RAISED:
            entry["outcome"] = "exception"
        else:
            entry.update(outcome="exit", port=v.port, length=v.trajectory.length(),
                         counts=v.trajectory.last().counts)
        report.terminals.append(entry)
    if mode == "sample":
        outcome = results[0][1] if results else RAISED
        return RunResult(None, outcome, report)
    return RunResult(_collect(kind, results), None, report)


def _log(c, box, port, out, traj, branch, weight):
    return {"box": box, "in": port, "out": out if out is not None else "exception",
            "branch": branch, "weight": weight, "counts": traj.last().counts}


def _collect(kind, results) -> Effect:
    if any(v is RAISED for _, v, _, _ in results):
        return throw(kind)
    exits = [(w, v) for w, v, _, _ in results]
    if kind is MAYBE:
        if len(exits) != 1:
            return throw(kind)
        return pure(kind, exits[0][1])
    if kind is LIST:
        return from_list(v for _, v in exits)
    if not exits:
        return throw(kind)
    return dist(exits)


# ---------------------------------------------------------------------------
# denotation

def generator_machine(g: Generator, kind: EffectKind, s0=None, name: str = "") -> MealyMachine:
    """The box as a Mealy machine on ``(port, trajectory)`` tokens."""
    def step(state, tok):
        port, traj = tok
        return fmap(generator_step(g, state, port, traj, kind),
                    lambda r: (r[0], (r[1], r[2])))
    return MealyMachine(tuple(g.in_ports()), tuple(g.out_ports()), s0, step, kind,
                        name or type(g).__name__)


def compile_to_mealy(s: Schedule, kind: EffectKind, seed: int = 0) -> MealyMachine:
    """Build the composite machine of a loop-free schedule from combinators.

    Boxes are absorbed in topological order.  At each stage the open wires
    (named by their sources) form the interface; a routing machine sends
    the wires of the next box to it (merging several into one in-port is
    the codiagonal) and the rest around it through an identity.
    """
    kind = EffectKind.parse(kind)
    order = _topo_order(s)
    states = dict(zip(s.box_names(), initial_states(s, seed)))
    frontier = tuple(("src", (OUTER, p)) for p in s.inputs)
    total = port_map(tuple(s.inputs), frontier, lambda p: ("src", (OUTER, p)), kind, "inputs")
    for name in order:
        g = s.boxes[name]
        bm = generator_machine(g, kind, states[name], name)
        ins = tuple(g.in_ports())
        mine = {f for f in frontier if s.target(f[1])[0] == name}
        others = tuple(f for f in frontier if f not in mine)
        route = port_map(frontier, tuple((0, p) for p in ins) + tuple((1, f) for f in others),
                         lambda f, mine=mine: (0, s.target(f[1])[1]) if f in mine else (1, f),
                         kind, f"route:{name}")
        layer = tensor(bm, structural("identity", kind, others))
        new_frontier = tuple(("src", (name, p)) for p in g.out_ports()) + others
        relabel = port_map(layer.outputs, new_frontier,
                           lambda q, name=name: ("src", (name, q[1])) if q[0] == 0 else q[1],
                           kind, f"relabel:{name}")
        total = m_compose(m_compose(m_compose(total, route), layer), relabel)
        frontier = new_frontier
    final = port_map(frontier, tuple(s.outputs), lambda f: s.target(f[1])[1], kind, "outputs")
    m = m_compose(total, final)
    return MealyMachine(tuple(s.inputs), tuple(s.outputs), m.s0, m.step, kind,
                        s.name or "schedule")


def step_as_exits(m: MealyMachine, traj: Trajectory, in_port: str) -> Effect:
    """One step of a compiled machine, shaped like :func:`run`'s result."""
    return fmap(m.step(m.s0, (in_port, traj)), lambda r: Exit(r[1][0], r[1][1]))


# ---------------------------------------------------------------------------
# building helpers

def single_box(g: Generator, name: str = "box") -> Schedule:
    """Schedule with one box whose ports are exposed directly."""
    wires = [((OUTER, p), (name, p)) for p in g.in_ports()]
    wires += [((name, p), (OUTER, p)) for p in g.out_ports()]
    return Schedule({name: g}, wires, dict(g.in_ports()), dict(g.out_ports()), name)


def sequence(s1: Schedule, s2: Schedule, links: Mapping[str, str], prefix=("a", "b"),
             name: str = "") -> Schedule:
    """Wire outputs of ``s1`` to inputs of ``s2`` per ``links`` (out -> in).

    Unlinked outputs of ``s1`` and all outputs of ``s2`` stay outer
    outputs (same-named ones merge); box names get the given prefixes.
    """
    p1, p2 = prefix
    ren1 = {b: f"{p1}.{b}" for b in s1.boxes}
    ren2 = {b: f"{p2}.{b}" for b in s2.boxes}
    boxes = {ren1[b]: g for b, g in s1.boxes.items()}
    boxes.update({ren2[b]: g for b, g in s2.boxes.items()})
    s2_in = {}
    for a, b in s2.wires:
        if a[0] == OUTER:
            s2_in.setdefault(a[1], b)
    wires = []
    outputs = {}
    for a, b in s1.wires:
        a2 = a if a[0] == OUTER else (ren1[a[0]], a[1])
        if b[0] == OUTER:
            if b[1] in links:
                tgt = s2_in[links[b[1]]]
                b2 = tgt if tgt[0] == OUTER else (ren2[tgt[0]], tgt[1])
            else:
                b2 = b
                outputs[b[1]] = s1.outputs[b[1]]
        else:
            b2 = (ren1[b[0]], b[1])
        wires.append((a2, b2))
    for a, b in s2.wires:
        if a[0] == OUTER:
            continue
        b2 = b if b[0] == OUTER else (ren2[b[0]], b[1])
        if b[0] == OUTER:
            outputs[b[1]] = s2.outputs[b[1]]
        wires.append(((ren2[a[0]], a[1]), b2))
    return Schedule(boxes, wires, dict(s1.inputs), outputs, name or f"{s1.name};{s2.name}")


def embed(boxes: Dict[str, Generator], wires: List[Tuple[Endpoint, Endpoint]], sub: Schedule,
          prefix: str, entries: Mapping[str, Endpoint], exits: Mapping[str, Endpoint]):
    """Substitute ``sub`` into a diagram under construction (in place).

    ``entries`` maps each outer input of ``sub`` to the source that feeds
    it; ``exits`` maps each outer output to the target it should reach.
    Box names are prefixed with ``prefix + "."``.
    """
    ren = {b: f"{prefix}.{b}" for b in sub.boxes}
    for b, g in sub.boxes.items():
        if ren[b] in boxes:
            raise ScheduleError(f"box {ren[b]!r} already exists")
        boxes[ren[b]] = g
    for a, b in sub.wires:
        tgt = exits[b[1]] if b[0] == OUTER else (ren[b[0]], b[1])
        if a[0] == OUTER:
            wires.append((entries[a[1]], tgt))
        else:
            wires.append(((ren[a[0]], a[1]), tgt))
