"""Predator and prey on a 10x10 torus.

Prints the populations every few steps and checks that the wolf rules are
the sheep rules pulled back along the functor swapping the two species.

    python3 demos/wolf_sheep.py [steps] [seed]
"""
import sys

from dyntrace.migration import delta_migrate, delta_migrate_rule
from dyntrace.wolfsheep import (SHEEP, SWAP, WOLF, Params, grid_world, shared_rules, simulate)


def main(steps=40, seed=1):
    p = Params()
    sheep, wolf = shared_rules(SHEEP, p), shared_rules(WOLF, p)
    same = all(delta_migrate_rule(SWAP, r) == wolf[k] for k, r in sheep.items())
    print(f"{len(sheep)} shared actions; wolf versions obtained by swapping species: {same}")

    w = grid_world(p, seed)
    swapped = delta_migrate(SWAP, w)
    print(f"start: {w.nparts('Sheep')} sheep, {w.nparts('Wolf')} wolves; "
          f"swapped: {swapped.nparts('Sheep')} sheep, {swapped.nparts('Wolf')} wolves")

    report = simulate(steps=steps, seed=seed)
    print(f"{'step':>4} {'sheep':>5} {'wolves':>6} {'grown':>5} {'box steps':>9}")
    for rec in report["records"]:
        if rec["step"] % 5 == 0:
            print(f"{rec['step']:>4} {rec['sheep']:>5} {rec['wolves']:>6} {rec['grown']:>5} "
                  f"{rec.get('box_steps', 0):>9}")
    bad = [r["step"] for r in report["records"] if r.get("violations")]
    print("invariant violations:", bad or "none")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
