"""Command-line entry point (``dyntrace``).

Exit codes: 0 success, 1 validation problem or malformed input, 2 the
computation itself ended in the exception (or found nothing to rewrite).
The default fuel comes from ``DYNTRACE_FUEL`` when ``--fuel`` is absent.
"""
from __future__ import annotations

import dataclasses
import os
import sys
import time

import click

from . import io
from .colimits import PartialMap
from .effects import RAISED
from .rewriting import RuleError, apply_rule, find_matches, validate_rule
from .scheduler import DEFAULT_FUEL, ScheduleError, run, typecheck
from .schema import SchemaError, homomorphisms, validate_schema
from .trajectory import Trajectory

EXIT_OK, EXIT_INVALID, EXIT_RAISED = 0, 1, 2


def _fail(msg: str, code: int = EXIT_INVALID):
    click.echo(msg, err=True)
    sys.exit(code)


def _load(kind, path):
    try:
        return io.load(kind, path)
    except io.FormatError as e:
        _fail(str(e))


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _default_fuel() -> int:
    raw = os.environ.get("DYNTRACE_FUEL")
    if raw is None:
        return DEFAULT_FUEL
    try:
        return int(raw)
    except ValueError:
        _fail(f"DYNTRACE_FUEL must be an integer, got {raw!r}")


def _pmap_data(p: PartialMap) -> dict:
    return {t: list(c) for t, c in p.components.items() if c}


@click.group()
def main():
    """Rewriting programs over attributed C-sets."""


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def validate(path):
    """Check a schema, instance, rule, functor or schedule file."""
    try:
        kind = io.guess_kind(path)
        obj = io.load(kind, path)
    except io.FormatError as e:
        _fail(str(e))
    problems = []
    if kind == "schema":
        problems = validate_schema(obj)
    elif kind == "instance":
        problems = obj.violations()
    elif kind == "rule":
        problems = validate_rule(obj)
    elif kind == "functor":
        problems = obj.violations()
    elif kind == "schedule":
        problems = typecheck(obj)
        for name, g in obj.boxes.items():
            if hasattr(g, "rule"):
                problems += [f"box {name}: {p}" for p in validate_rule(g.rule)]
    for p in problems:
        click.echo(f"{path}: {p}")
    if problems:
        sys.exit(EXIT_INVALID)
    click.echo(f"{path}: valid {kind}")


@main.command()
@click.option("--pattern", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--monic", is_flag=True)
def homs(pattern, target, monic):
    """List homomorphisms from PATTERN into TARGET."""
    A, X = _load("instance", pattern), _load("instance", target)
    try:
        found = homomorphisms(A, X, monic=monic)
    except SchemaError as e:
        _fail(str(e))
    data = [{"components": {t: list(c) for t, c in f.components.items() if c},
             "assignment": {f"v{k}": v for k, v in sorted(f.assignment.items())}} for f in found]
    _emit(io.report_json({"count": len(found), "morphisms": data}), None)


@main.command(name="rewrite")
@click.option("--rule", "rule_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--world", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--agent", type=click.Path(exists=True, dir_okay=False),
              help="Morphism file fixing the rule's agent (default: match anywhere).")
@click.option("--match", "index", default=0, show_default=True, help="Index among matches.")
@click.option("--semantics", type=click.Choice(["dpo", "spo"]))
@click.option("--out", type=click.Path(dir_okay=False), help="Write the new world here.")
def rewrite_cmd(rule_path, world, agent, index, semantics, out):
    """Apply a rule once and print the new world, the partial map and a report."""
    rule = _load("rule", rule_path)
    if semantics:
        rule.semantics = semantics.upper()
    problems = validate_rule(rule)
    if problems:
        _fail("; ".join(problems))
    X = _load("instance", world)
    probe = rule
    try:
        a = io.load_agent(agent, X)
    except io.FormatError as e:
        _fail(str(e))
    if agent is None:
        probe = dataclasses.replace(rule, agent_in=None)  # any match, not one through an agent
    try:
        matches = find_matches(probe, X, a)
        if not matches:
            click.echo(io.report_json({"rule": rule.name, "matches": 0, "outcome": "fail"}),
                       nl=False)
            sys.exit(EXIT_RAISED)
        if not 0 <= index < len(matches):
            _fail(f"--match {index} out of range (found {len(matches)})")
        res = apply_rule(rule, matches[index])
    except (RuleError, SchemaError) as e:
        _fail(f"rewrite raised: {e}", EXIT_RAISED)
    if out:
        io.dump(res.world, out)
    report = {"rule": rule.name, "semantics": rule.semantics.lower(), "matches": len(matches),
              "match": index, "outcome": "success", "counts": res.world.counts,
              "partial_map": _pmap_data(res.pmap)}
    if not out:
        report["world"] = io.instance_data(res.world, with_schema=False)
    _emit(io.report_json(report), None)


@main.command(name="run")
@click.option("--schedule", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--world", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--agent", type=click.Path(exists=True, dir_okay=False),
              help="Morphism file into the world (default: the empty agent).")
@click.option("--port", "in_port", help="Outer input port (needed if there are several).")
@click.option("--monad", type=click.Choice(["maybe", "list", "dist"]), default="maybe",
              show_default=True)
@click.option("--mode", type=click.Choice(["sample", "exact"]), default="exact",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--fuel", type=int)
@click.option("--out", type=click.Path(dir_okay=False), help="Report file (default stdout).")
def run_cmd(schedule, world, agent, in_port, monad, mode, seed, fuel, out):
    """Run a schedule on a world and write the run report."""
    s = _load("schedule", schedule)
    X = _load("instance", world)
    try:
        a = io.load_agent(agent, X)
    except io.FormatError as e:
        _fail(str(e))
    fuel = _default_fuel() if fuel is None else fuel
    try:
        res = run(s, Trajectory(X, a), monad, seed=seed, fuel=fuel, mode=mode, in_port=in_port)
    except (ScheduleError, ValueError) as e:
        _fail(str(e))
    data = res.report.to_dict()
    data["schedule"] = s.name
    raised = res.outcome is RAISED if mode == "sample" else res.effect.raised
    data["result"] = "exception" if raised else "ok"
    _emit(io.report_json(data), out)
    sys.exit(EXIT_RAISED if raised else EXIT_OK)


@main.command(name="export-dot")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
def export_dot(path, out):
    """Render a schedule or an instance as Graphviz DOT text."""
    try:
        kind = io.guess_kind(path)
        if kind not in ("schedule", "instance"):
            _fail(f"{path}:1: DOT export takes a schedule or an instance, not a {kind}")
        obj = io.load(kind, path)
    except io.FormatError as e:
        _fail(str(e))
    _emit(io.to_dot(obj), out)


@main.group()
def example():
    """Bundled models."""


@example.command(name="wolf-sheep")
@click.option("--steps", default=100, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Report file (default stdout).")
@click.option("--quiet", is_flag=True, help="Print only the summary line.")
def wolf_sheep(steps, seed, out, quiet):
    """Predator-prey model on a 10x10 torus."""
    from .wolfsheep import simulate

    t0 = time.perf_counter()
    report = simulate(steps=steps, seed=seed)
    elapsed = time.perf_counter() - t0
    text = io.report_json(report)
    if out or not quiet:
        _emit(text, out)
    last = report["records"][-1]
    bad = [r for r in report["records"] if r.get("violations") or r.get("exception")]
    click.echo(f"wolf-sheep: {len(report['records']) - 1} steps, sheep={last.get('sheep')} "
               f"wolves={last.get('wolves')} grown={last.get('grown')}, "
               f"{len(bad)} bad steps, {elapsed:.1f}s", err=True)
    sys.exit(EXIT_INVALID if bad else EXIT_OK)


if __name__ == "__main__":
    main()
