"""Loop over candidate agents and rewrite the first one that passes a test.

The world is a graph with named vertices.  The program visits every edge
in turn, checks whether its target is named ``t``, and if so deletes that
target.  A target with other incoming edges cannot be deleted (the
edges would dangle), so the loop moves on.

    python3 demos/agent_loop.py            # run it and write demos/files/
    dyntrace run --schedule demos/files/agent_loop.yaml \\
                 --world demos/files/named_world.yaml
"""
from pathlib import Path

from dyntrace import io
from dyntrace.colimits import initial_acset, initial_morphism
from dyntrace.effects import LIST, MAYBE
from dyntrace.rewriting import RewriteRule
from dyntrace.scheduler import (OUTER, AgentTest, ControlFlow, Query, Rewrite, Schedule, Weaken,
                                run, typecheck)
from dyntrace.schema import ACSetBuilder, Schema, Var
from dyntrace.trajectory import Trajectory

NAMED = Schema(("V", "E"), (("Name", "str"),), (("src", "E", "V"), ("tgt", "E", "V")),
               (("name", "V", "Name"),), name="NamedGraph")
OUT = Path(__file__).parent / "files"


def named_graph(names, edges):
    b = ACSetBuilder(NAMED)
    for n in names:
        b.add_part("V", name=n)
    for s, t in edges:
        b.add_part("E", src=s, tgt=t)
    return b.build()


def program() -> Schedule:
    E2 = named_graph([Var(0), Var(1)], [(0, 1)])
    V1 = named_graph([Var(0)], [])
    zero = initial_acset(NAMED)
    delete_target = RewriteRule.build(E2, V1, V1, {"V": [0], "E": []}, {"V": [0], "E": []},
                                      agent_in=(E2, {"V": [0, 1], "E": [0]}),
                                      agent_out=(V1, {"V": [0], "E": []}), name="delete_target")
    boxes = {"each_edge": Query(zero, E2, E2),
             "is_t": ControlFlow(E2, 2, predicate=AgentTest("v1 == 't'")),
             "delete": Rewrite(delete_target),
             "forget": Weaken(initial_morphism(V1))}
    wires = [((OUTER, "in"), ("each_edge", "A")),
             (("each_edge", "B"), ("is_t", "in")),
             (("is_t", "1"), ("delete", "in")), (("is_t", "2"), ("each_edge", "C")),
             (("delete", "success"), ("forget", "in")), (("delete", "fail"), ("each_edge", "C")),
             (("forget", "out"), (OUTER, "out")),
             (("each_edge", "A"), (OUTER, "out")), (("each_edge", "0"), (OUTER, "out"))]
    return Schedule(boxes, wires, {"in": zero}, {"out": zero}, "delete_first_t")


def main():
    s = program()
    assert typecheck(s) == []
    world = named_graph(["c", "t", "e", "a", "t", "g"], [(0, 1), (2, 1), (3, 4), (5, 3)])

    res = run(s, Trajectory(world), MAYBE)
    (ex,) = res.effect.values
    after = ex.trajectory.last()
    print("before:", world.counts, sorted(world.attr("name")))
    print("after: ", after.counts, sorted(after.attr("name")))
    for step in res.report.steps:
        print(f"  {step['box']:>9}.{step['in']:<3} -> {step['out']}")

    # under the list monad the rewrite box branches over every match it finds
    res = run(s, Trajectory(world), LIST)
    print("list monad:", len(res.effect.values), "outcome(s)")

    OUT.mkdir(exist_ok=True)
    io.dump(NAMED, str(OUT / "named_graph_schema.yaml"))
    io.dump(world, str(OUT / "named_world.yaml"))
    io.dump(s, str(OUT / "agent_loop.yaml"))
    (OUT / "agent_loop.dot").write_text(io.to_dot(s))
    print("wrote", ", ".join(sorted(p.name for p in OUT.iterdir())))


if __name__ == "__main__":
    main()
