"""Mealy machines: the trap, two traps in a row, and a feedback loop.

    python3 demos/traps.py
"""
from dyntrace.effects import DIST, MAYBE, dist, pure
from dyntrace.mealy import (MealyMachine, behavior_tree, behaviorally_equal, trace, trap, trap2,
                            trap2_components, trap2_state, trap2_states)


def show_tree(tree, indent=""):
    for tok, eff in tree.children:
        for w, (out, sub) in eff.branches():
            print(f"{indent}{tok[0]} -> {out[0]}")
            show_tree(sub, indent + "  ")


def main():
    t = trap()
    print("one trap, two steps deep:")
    show_tree(behavior_tree(t, 2, [("U", None), ("A", None)]))

    t2 = trap2()
    s = trap2_state("T", "T")
    for tok in ("A", "U", "A", "A"):
        s, out = t2.step(s, (tok, None)).values[0]
        print(f"two traps: in {tok}, out {out[0]}, states now {trap2_components(s)}")

    states = trap2_states()
    distinct = all(not behaviorally_equal(
        MealyMachine(t2.inputs, t2.outputs, a, t2.step, MAYBE),
        MealyMachine(t2.inputs, t2.outputs, b, t2.step, MAYBE), 3)
        for i, a in enumerate(states) for b in states[i + 1:])
    print("the four composite states are pairwise distinguishable:", distinct)

    # a coin that loops back on tails: some branch always runs out of fuel,
    # and one exceptional branch makes the whole step exceptional
    def coin(s, tok):
        return dist([(0.5, (s, ((0, "done"), tok[1]))), (0.5, (s, ((1, "again"), tok[1])))])
    m = MealyMachine(((0, "go"), (1, "again")), ((0, "done"), (1, "again")), 0, coin, DIST)
    print(f"coin loop with fuel 20: {trace(m, 20).step(0, ('go', None))}")

    # the same loop with a bounded counter in the payload terminates on every branch
    def bounded(s, tok):
        n = tok[1]
        if n >= 3:
            return pure(DIST, (s, ((0, "done"), n)))
        return dist([(0.5, (s, ((0, "done"), n))), (0.5, (s, ((1, "again"), n + 1)))])
    m = MealyMachine(((0, "go"), (1, "again")), ((0, "done"), (1, "again")), 0, bounded, DIST)
    for fuel in (2, 3):
        eff = trace(m, fuel).step(0, ("go", 0))
        print(f"bounded loop with fuel {fuel}: {eff}")

    def forever(s, tok):
        return pure(MAYBE, (s, ((1, "again"), tok[1])))
    m = MealyMachine(((0, "go"), (1, "again")), ((0, "done"), (1, "again")), 0, forever, MAYBE)
    print("a loop that never exits:", trace(m, 100).step(0, ("go", None)))


if __name__ == "__main__":
    main()
