"""Wolf-sheep predation on a toroidal grid, written as a rewriting program.

One model step visits every sheep, then every wolf, then every vertex:

* an animal with zero energy starves;
* otherwise it may turn left or right, moves one edge forward (paying one
  unit of energy), eats, and may reproduce;
* every vertex whose grass counter is positive counts down by one.

The wolf routine is the sheep routine pulled back along the functor that
swaps the two species, with the eating step and the breeding odds
replaced.  Parameters follow the defaults of the classic NetLogo model;
they are configuration, not measured constants.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .colimits import initial_acset, initial_morphism
from .effects import MAYBE
from .migration import SchemaFunctor, delta_migrate_schedule
from .rewriting import RewriteRule
from .scheduler import (OUTER, AgentTest, ControlFlow, Query, Rewrite, Schedule, Weaken, embed, run,
                        typecheck)
from .schema import ACSet, ACSetBuilder, Schema, Var
from .trajectory import Trajectory

SCHEMA = Schema(
    tables=("V", "E", "Wolf", "Sheep"),
    attr_types=(("Dir", "str"), ("N", "int")),
    homs=(("src", "E", "V"), ("tgt", "E", "V"), ("w_pos", "Wolf", "V"), ("s_pos", "Sheep", "V")),
    attrs=(("w_eng", "Wolf", "N"), ("s_eng", "Sheep", "N"), ("grass", "V", "N"),
           ("w_dir", "Wolf", "Dir"), ("s_dir", "Sheep", "Dir"), ("dir", "E", "Dir")),
    name="WolfSheep",
)

DIRS = ("N", "E", "S", "W")
LEFT = {"N": "W", "W": "S", "S": "E", "E": "N"}
RIGHT = {v: k for k, v in LEFT.items()}
STEP = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0)}

SWAP = SchemaFunctor(
    SCHEMA, SCHEMA,
    ob={"V": "V", "E": "E", "Wolf": "Sheep", "Sheep": "Wolf", "Dir": "Dir", "N": "N"},
    hom={"src": "src", "tgt": "tgt", "w_pos": "s_pos", "s_pos": "w_pos"},
    attr={"w_eng": "s_eng", "s_eng": "w_eng", "grass": "grass", "w_dir": "s_dir",
          "s_dir": "w_dir", "dir": "dir"},
)


@dataclass(frozen=True)
class Params:
    width: int = 10
    height: int = 10
    sheep: int = 30
    wolves: int = 3
    move_cost: int = 1
    sheep_gain: int = 4
    wolf_gain: int = 20
    sheep_reproduce: float = 0.04
    wolf_reproduce: float = 0.05
    regrowth: int = 30
    birth_energy: int = 4  # passed from parent to offspring; needs strictly more to breed
    turn: Tuple[float, float, float] = (0.5, 0.25, 0.25)  # straight, left, right


@dataclass(frozen=True)
class Species:
    table: str
    pos: str
    eng: str
    dir: str


SHEEP = Species("Sheep", "s_pos", "s_eng", "s_dir")
WOLF = Species("Wolf", "w_pos", "w_eng", "w_dir")


# ---------------------------------------------------------------------------
# patterns

def _pattern(vertices=(), edges=(), animals=(), other=()) -> ACSet:
    """``vertices``: grass values; ``edges``: (src, tgt, dir);
    ``animals`` / ``other``: (species, pos, eng, dir)."""
    b = ACSetBuilder(SCHEMA)
    for g in vertices:
        b.add_part("V", grass=g)
    for s, t, d in edges:
        b.add_part("E", src=s, tgt=t, dir=d)
    for sp, pos, eng, d in list(animals) + list(other):
        b.add_part(sp.table, **{sp.pos: pos, sp.eng: eng, sp.dir: d})
    return b.build()


def agent_shape(sp: Species) -> ACSet:
    return _pattern([Var(0)], [], [(sp, 0, Var(1), Var(2))])


def vertex_shape() -> ACSet:
    return _pattern([Var(0)])


EMPTY = initial_acset(SCHEMA)


def _rule(L, K, R, l, r, A=None, a=None, B=None, b=None, exprs=None, name=""):
    return RewriteRule.build(L, K, R, l, r, agent_in=(A, a) if A is not None else None,
                             agent_out=(B, b) if B is not None else None, exprs=exprs or {},
                             name=name)


def starve_rule(sp: Species) -> RewriteRule:
    L = _pattern([Var(0)], [], [(sp, 0, 0, Var(2))])
    K = vertex_shape()
    return _rule(L, K, K, {"V": [0]}, {"V": [0]}, agent_shape(sp), {"V": [0], sp.table: [0]},
                 vertex_shape(), {"V": [0]}, name=f"{sp.table.lower()}_starve")


def turn_rule(sp: Species, d: str, side: str) -> RewriteRule:
    new = (LEFT if side == "left" else RIGHT)[d]
    L = _pattern([Var(0)], [], [(sp, 0, Var(1), d)])
    K = agent_shape(sp)
    R = _pattern([Var(0)], [], [(sp, 0, Var(1), new)])
    ids = {"V": [0], sp.table: [0]}
    return _rule(L, K, R, ids, ids, agent_shape(sp), ids, agent_shape(sp), ids,
                 name=f"{sp.table.lower()}_{side}_{d}")


def move_rule(sp: Species, cost: int) -> RewriteRule:
    L = _pattern([Var(0), Var(3)], [(0, 1, Var(2))], [(sp, 0, Var(1), Var(2))])
    K = _pattern([Var(0), Var(3)], [(0, 1, Var(2))])
    R = _pattern([Var(0), Var(3)], [(0, 1, Var(2))], [(sp, 1, Var(4), Var(2))])
    kl = {"V": [0, 1], "E": [0]}
    return _rule(L, K, R, kl, kl, agent_shape(sp), {"V": [0], sp.table: [0]},
                 agent_shape(sp), {"V": [1], sp.table: [0]},
                 exprs={(sp.eng, 0): f"v1 - {cost}"}, name=f"{sp.table.lower()}_move")


def reproduce_rule(sp: Species, birth: int) -> RewriteRule:
    """The parent hands ``birth`` units of energy to a new animal beside it."""
    L = agent_shape(sp)
    R = _pattern([Var(0)], [], [(sp, 0, Var(3), Var(2)), (sp, 0, Var(4), Var(2))])
    ids = {"V": [0], sp.table: [0]}
    return _rule(L, L, R, ids, ids, L, ids, L, ids,
                 exprs={(sp.eng, 0): f"v1 - {birth}", (sp.eng, 1): f"{birth}"},
                 name=f"{sp.table.lower()}_reproduce")


def sheep_eat_rule(gain: int, regrowth: int) -> RewriteRule:
    sp = SHEEP
    L = _pattern([0], [], [(sp, 0, Var(1), Var(2))])
    K = agent_shape(sp)
    R = _pattern([regrowth], [], [(sp, 0, Var(5), Var(2))])
    ids = {"V": [0], sp.table: [0]}
    return _rule(L, K, R, ids, ids, agent_shape(sp), ids, agent_shape(sp), ids,
                 exprs={(sp.eng, 0): f"v1 + {gain}"}, name="sheep_eat")


def wolf_eat_rule(gain: int) -> RewriteRule:
    L = _pattern([Var(0)], [], [(WOLF, 0, Var(1), Var(2))], [(SHEEP, 0, Var(3), Var(4))])
    K = agent_shape(WOLF)
    R = _pattern([Var(0)], [], [(WOLF, 0, Var(5), Var(2))])
    ids = {"V": [0], "Wolf": [0]}
    return _rule(L, K, R, ids, ids, agent_shape(WOLF), ids, agent_shape(WOLF), ids,
                 exprs={("w_eng", 0): f"v1 + {gain}"}, name="wolf_eat")


def grass_rule() -> RewriteRule:
    V = vertex_shape()
    R = _pattern([Var(1)])
    ids = {"V": [0]}
    return _rule(V, V, R, ids, ids, V, ids, V, ids, exprs={("grass", 0): "v0 - 1"},
                 name="grass_grow")


def shared_rules(sp: Species, p: Params) -> Dict[str, RewriteRule]:
    """The actions common to both species, keyed by box name."""
    rules = {"starve": starve_rule(sp), "move": move_rule(sp, p.move_cost),
             "reproduce": reproduce_rule(sp, p.birth_energy)}
    for side in ("left", "right"):
        for d in DIRS:
            rules[f"{side}_{d}"] = turn_rule(sp, d, side)
    return rules


# ---------------------------------------------------------------------------
# programs

def animal_routine(sp: Species, p: Params, eat: RewriteRule, reproduce_p: float) -> Schedule:
    """One animal's turn: agent shape in, nothing (the empty agent) out."""
    S = agent_shape(sp)
    rules = shared_rules(sp, p)
    boxes = {name: Rewrite(r) for name, r in rules.items()}
    boxes["eat"] = Rewrite(eat)
    boxes["turn"] = ControlFlow(S, weights=p.turn, label="turn")
    boxes["fertile"] = ControlFlow(S, predicate=AgentTest(f"v1 > {p.birth_energy}"),
                                   label="fertile")
    boxes["breed"] = ControlFlow(S, weights=(reproduce_p, 1 - reproduce_p), label="breed")
    boxes["dead"] = Weaken(initial_morphism(vertex_shape()))
    boxes["done"] = Weaken(initial_morphism(S))
    wires = [
        ((OUTER, "in"), ("starve", "in")),
        (("starve", "success"), ("dead", "in")),
        (("dead", "out"), (OUTER, "out")),
        (("starve", "fail"), ("turn", "in")),
        (("turn", "1"), ("move", "in")),
        (("turn", "2"), ("left_N", "in")),
        (("turn", "3"), ("right_N", "in")),
    ]
    for side in ("left", "right"):
        for i, d in enumerate(DIRS):
            box = f"{side}_{d}"
            wires.append(((box, "success"), ("move", "in")))
            nxt = ("move", "in") if i == len(DIRS) - 1 else (f"{side}_{DIRS[i + 1]}", "in")
            wires.append(((box, "fail"), nxt))
    wires += [
        (("move", "success"), ("eat", "in")),
        (("move", "fail"), ("eat", "in")),
        (("eat", "success"), ("fertile", "in")),
        (("eat", "fail"), ("fertile", "in")),
        (("fertile", "1"), ("breed", "in")),
        (("fertile", "2"), ("done", "in")),
        (("breed", "1"), ("reproduce", "in")),
        (("breed", "2"), ("done", "in")),
        (("reproduce", "success"), ("done", "in")),
        (("reproduce", "fail"), ("done", "in")),
        (("done", "out"), (OUTER, "out")),
    ]
    return Schedule(boxes, wires, {"in": S}, {"out": EMPTY}, f"{sp.table.lower()}_turn")


def sheep_routine(p: Params) -> Schedule:
    return animal_routine(SHEEP, p, sheep_eat_rule(p.sheep_gain, p.regrowth), p.sheep_reproduce)


def wolf_routine(p: Params) -> Schedule:
    """The sheep routine with species swapped, plus wolf-specific eating.

    Reproduction odds differ between species, so the breeding weights are
    reset after migration.
    """
    s = delta_migrate_schedule(SWAP, sheep_routine(p))
    s.boxes["eat"] = Rewrite(wolf_eat_rule(p.wolf_gain))
    s.boxes["breed"] = ControlFlow(agent_shape(WOLF),
                                   weights=(p.wolf_reproduce, 1 - p.wolf_reproduce), label="breed")
    s.name = "wolf_turn"
    return s


def grass_routine() -> Schedule:
    V = vertex_shape()
    boxes = {"positive": ControlFlow(V, 2, predicate=AgentTest("v0 > 0"), label="grass>0"),
             "grow": Rewrite(grass_rule()),
             "done": Weaken(initial_morphism(V))}
    wires = [((OUTER, "in"), ("positive", "in")),
             (("positive", "1"), ("grow", "in")),
             (("positive", "2"), ("done", "in")),
             (("grow", "success"), ("done", "in")),
             (("grow", "fail"), ("done", "in")),
             (("done", "out"), (OUTER, "out"))]
    return Schedule(boxes, wires, {"in": V}, {"out": EMPTY}, "grass")


def step_program(p: Params) -> Schedule:
    """Empty agent in and out: sheep, then wolves, then grass."""
    boxes: Dict[str, object] = {}
    wires: List[tuple] = []
    stages = [("sheep", agent_shape(SHEEP), sheep_routine(p)),
              ("wolves", agent_shape(WOLF), wolf_routine(p)),
              ("grass", vertex_shape(), grass_routine())]
    prev = [(OUTER, "in")]
    for name, shape, routine in stages:
        q = f"each_{name}"
        boxes[q] = Query(EMPTY, shape, EMPTY)
        for src in prev:
            wires.append((src, (q, "A")))
        embed(boxes, wires, routine, name, {"in": (q, "B")}, {"out": (q, "C")})
        prev = [(q, "A"), (q, "0")]
    for src in prev:
        wires.append((src, (OUTER, "out")))
    return Schedule(boxes, wires, {"in": EMPTY}, {"out": EMPTY}, "wolf_sheep_step")


# ---------------------------------------------------------------------------
# worlds and runs

def grid_world(p: Params, seed: int) -> ACSet:
    """Torus with four directed edges per vertex and randomly placed animals."""
    rng = np.random.Generator(np.random.PCG64(seed))
    b = ACSetBuilder(SCHEMA)
    W, H = p.width, p.height
    for _ in range(W * H):
        grown = rng.random() < 0.5
        b.add_part("V", grass=0 if grown else int(rng.integers(1, p.regrowth + 1)))
    for y in range(H):
        for x in range(W):
            for d in DIRS:
                dx, dy = STEP[d]
                b.add_part("E", src=y * W + x, tgt=((y + dy) % H) * W + (x + dx) % W, dir=d)
    for sp, n, gain in ((SHEEP, p.sheep, p.sheep_gain), (WOLF, p.wolves, p.wolf_gain)):
        for _ in range(n):
            b.add_part(sp.table, **{sp.pos: int(rng.integers(W * H)),
                                    sp.eng: int(rng.integers(1, 2 * gain + 1)),
                                    sp.dir: DIRS[int(rng.integers(4))]})
    return b.build()


def world_summary(X: ACSet) -> dict:
    return {"sheep": X.nparts("Sheep"), "wolves": X.nparts("Wolf"),
            "grown": sum(1 for g in X.attr("grass") if g == 0)}


def check_world(X: ACSet) -> List[str]:
    """Model invariants: valid positions, non-negative energy and grass."""
    out = list(X.violations())
    for a in ("w_eng", "s_eng", "grass"):
        if any(v < 0 for v in X.attr(a)):
            out.append(f"negative {a}")
    nv = X.nparts("V")
    for h in ("w_pos", "s_pos"):
        if any(not 0 <= v < nv for v in X.hom(h)):
            out.append(f"invalid {h}")
    return out


def step_seed(seed: int, step: int) -> int:
    return int(np.random.SeedSequence([seed, step]).generate_state(1)[0])


def _population_check(before: dict, after: dict, report) -> List[str]:
    births_s = report.count("sheep.reproduce", "success")
    births_w = report.count("wolves.reproduce", "success")
    deaths_s = report.count("sheep.starve", "success") + report.count("wolves.eat", "success")
    deaths_w = report.count("wolves.starve", "success")
    out = []
    if after["sheep"] != before["sheep"] + births_s - deaths_s:
        out.append("sheep population changed outside recorded rule applications")
    if after["wolves"] != before["wolves"] + births_w - deaths_w:
        out.append("wolf population changed outside recorded rule applications")
    return out


def simulate(steps: int = 100, seed: int = 1, params: Optional[Params] = None,
             fuel: int = 1_000_000) -> dict:
    """Run the model; returns a JSON-ready report.

    The report holds one record per step (populations, grown grass, rule
    counts and any invariant violations).  It contains no timings, so equal
    seeds give identical reports.
    """
    p = params or Params()
    program = step_program(p)
    problems = typecheck(program)
    if problems:
        raise ValueError("; ".join(problems))
    world = grid_world(p, seed)
    records = [{"step": 0, **world_summary(world), "rules": {}, "violations": check_world(world)}]
    for k in range(1, steps + 1):
        before = world_summary(world)
        res = run(program, Trajectory(world), MAYBE, seed=step_seed(seed, k), fuel=fuel,
                  mode="sample", log_steps=False, check=False)
        if not hasattr(res.outcome, "trajectory"):
            records.append({"step": k, "exception": True})
            break
        world = res.outcome.trajectory.last()
        after = world_summary(world)
        rules = {box: dict(sorted(ports.items())) for box, ports in sorted(res.report.tally.items())
                 if isinstance(program.boxes[box], Rewrite) and ports.get("success")}
        violations = check_world(world) + _population_check(before, after, res.report)
        records.append({"step": k, **after, "box_steps": res.report.fuel_used,
                        "rules": {b: v["success"] for b, v in rules.items()},
                        "violations": violations})
    return {"model": "wolf-sheep", "seed": seed, "steps": steps, "params": asdict(p),
            "records": records}
