"""YAML file formats for schemas, instances, morphisms, rules, functors and
schedules, plus DOT export.

Every document is a mapping.  Unknown keys are rejected and errors carry
the file name and line.  Attribute variables are written ``{var: n}``.
A ``schema`` key may hold a schema mapping or the path of a schema file
(relative to the document).

Schema::

    name: Graph
    tables: [V, E]
    attr_types: {Label: str}
    homs: {src: [E, V], tgt: [E, V]}
    attrs: {label: [V, Label]}

Instance (a table with no columns may be given as a count)::

    schema: graph.yaml
    parts:
      V: [{label: a}, {label: {var: 0}}]
      E: [{src: 0, tgt: 1}]

Morphism: ``schema``, ``dom``, ``cod`` (instance bodies without
``schema``) and ``components`` (table to list of ids).  Variable bindings
are read off the components.

Rule: ``schema``, ``name``, ``semantics`` (dpo/spo), ``monic``, ``L``,
``K``, ``R``, ``l``, ``r``, optional ``agent_in`` / ``agent_out`` (each
``{shape: instance, map: components}``) and ``exprs`` (list of
``{attr, part, expr}``).

Functor: ``source``, ``target`` (schemas), ``ob``, ``hom``, ``attr``.

Schedule: ``schema``, ``name``, ``shapes`` (named instances), ``rules``
(named rule bodies), ``inputs`` / ``outputs`` (port to shape name),
``boxes`` and ``wires`` (pairs of ``box.port`` strings, ``_`` for the outer
interface).  Box types::

    {type: rewrite, rule: R}
    {type: weaken, dom: S, cod: S, map: {...}}        # f: dom -> cod
    {type: strengthen, dom: S, cod: S, map: {...}}
    {type: init, in: S, dom: S, cod: S, map: {...}}   # agent dom -> world cod
    {type: fail, shape: S, mode: exception|empty}
    {type: control, shape: S, weights: [...]}         # or n + predicate
    {type: query, A: S, B: S, C: S}
"""
from __future__ import annotations

import json
import os
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from .colimits import initial_morphism
from .migration import SchemaFunctor
from .rewriting import RewriteRule, format_expr
from .scheduler import (OUTER, AgentTest, ControlFlow, Fail, Init, Query, Rewrite, Schedule,
                        Strengthen, Weaken)
from .schema import (ACSet, ACSetMorphism, Schema, SchemaError, Var, infer_morphism,
                     validate_schema)


class FormatError(ValueError):
    """Malformed file; the message starts with ``file:line:``."""


# ---------------------------------------------------------------------------
# located YAML

class _Map(dict):
    def __init__(self, *a):
        super().__init__(*a)
        self.line, self.key_lines = 0, {}


class _Seq(list):
    def __init__(self, *a):
        super().__init__(*a)
        self.line, self.item_lines = 0, [0] * len(self)


_scalar_loader = yaml.SafeLoader("")


def _convert(node):
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = _Map()
        out.line, out.key_lines = line, {}
        for k, v in node.value:
            key = _convert(k)
            if isinstance(key, (_Map, _Seq)):
                raise FormatError(f"<input>:{k.start_mark.line + 1}: keys must be scalars")
            out[key] = _convert(v)
            out.key_lines[key] = k.start_mark.line + 1
        return out
    if isinstance(node, yaml.SequenceNode):
        out = _Seq(_convert(v) for v in node.value)
        out.line, out.item_lines = line, [v.start_mark.line + 1 for v in node.value]
        return out
    return _scalar_loader.construct_object(node, deep=True)


class _Doc:
    """Reader context: file name, base directory, error helper."""

    def __init__(self, name: str, base: str):
        self.name, self.base = name, base

    def fail(self, line: int, msg: str):
        raise FormatError(f"{self.name}:{line}: {msg}")

    def mapping(self, node, what: str, allowed, required=()) -> _Map:
        if not isinstance(node, _Map):
            self.fail(getattr(node, "line", 1), f"{what} must be a mapping")
        for k in node:
            if k not in allowed:
                self.fail(node.key_lines[k], f"unknown field {k!r} in {what}")
        for k in required:
            if k not in node:
                self.fail(node.line, f"{what} is missing field {k!r}")
        return node

    def line_of(self, m: _Map, key) -> int:
        return m.key_lines.get(key, m.line) if isinstance(m, _Map) else 1

    def seq(self, node, what: str, line: int) -> _Seq:
        if not isinstance(node, _Seq):
            self.fail(getattr(node, "line", line), f"{what} must be a list")
        return node


def _parse_text(text: str, name: str = "<input>", base: str = ".") -> Tuple[_Doc, Any]:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark else 1
        raise FormatError(f"{name}:{line}: {getattr(e, 'problem', None) or e}") from None
    doc = _Doc(name, base)
    if node is None:
        doc.fail(1, "empty document")
    try:
        return doc, _convert(node)
    except FormatError as e:
        raise FormatError(str(e).replace("<input>", name, 1)) from None


def _read_file(path: str) -> Tuple[_Doc, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise FormatError(f"{path}:0: cannot read file ({e.strerror})") from None
    return _parse_text(text, path, os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# readers

def _schema(doc: _Doc, node) -> Schema:
    if isinstance(node, str):
        d2, n2 = _read_file(os.path.join(doc.base, node))
        return _schema(d2, n2)
    m = doc.mapping(node, "schema", ("name", "tables", "attr_types", "homs", "attrs"), ("tables",))
    tables = doc.seq(m["tables"], "tables", doc.line_of(m, "tables"))

    def pairs(key, width):
        out = []
        sub = m.get(key, _Map())
        if not isinstance(sub, dict):
            doc.fail(doc.line_of(m, key), f"{key} must be a mapping")
        for k, v in sub.items():
            line = sub.key_lines.get(k, m.line) if isinstance(sub, _Map) else m.line
            if width == 1:
                out.append((k, v))
            else:
                if not isinstance(v, list) or len(v) != width:
                    doc.fail(line, f"{key}.{k} must be a list of {width} names")
                out.append((k, *v))
        return out

    s = Schema(tuple(tables), pairs("attr_types", 1), pairs("homs", 2), pairs("attrs", 2),
               name=str(m.get("name", "")))
    problems = validate_schema(s)
    if problems:
        doc.fail(m.line, "invalid schema: " + "; ".join(problems))
    return s


def _value(doc: _Doc, v, line: int):
    if isinstance(v, dict):
        if set(v) != {"var"} or not isinstance(v["var"], int) or isinstance(v["var"], bool):
            doc.fail(getattr(v, "line", line), "an attribute value mapping must be {var: <int>}")
        return Var(v["var"])
    if isinstance(v, list):
        doc.fail(getattr(v, "line", line), "attribute values must be scalars")
    return v


def _instance(doc: _Doc, node, schema: Schema, what: str = "instance") -> ACSet:
    m = doc.mapping(node, what, ("parts", "schema"))
    parts = m.get("parts", _Map())
    parts = doc.mapping(parts, f"{what} parts", schema.tables) if parts else _Map()
    counts, homs, attrs = {}, {h: [] for h in schema.hom_names}, {a: [] for a in schema.attr_names}
    cols = {t: schema.homs_out[t] + schema.attrs_of[t] for t in schema.tables}
    for t in schema.tables:
        rows = parts.get(t, 0)
        tline = doc.line_of(parts, t)
        if isinstance(rows, int) and not isinstance(rows, bool):
            if cols[t] and rows:
                doc.fail(tline, f"table {t!r} has columns; list its parts")
            counts[t] = rows
            continue
        rows = doc.seq(rows, f"table {t!r}", tline)
        counts[t] = len(rows)
        for i, row in enumerate(rows):
            rl = rows.item_lines[i]
            if not cols[t] and row in (None, {}):
                continue
            row = doc.mapping(row, f"part {i} of {t!r}", cols[t], cols[t])
            for h in schema.homs_out[t]:
                v = row[h]
                if not isinstance(v, int) or isinstance(v, bool):
                    doc.fail(doc.line_of(row, h) or rl, f"{h} must be a part id")
                homs[h].append(v)
            for a in schema.attrs_of[t]:
                attrs[a].append(_value(doc, row[a], doc.line_of(row, a)))
    try:
        X = ACSet(schema, counts, homs, attrs)
    except SchemaError as e:
        doc.fail(m.line, f"invalid {what}: {e}")
    return X


def _components(doc: _Doc, node, schema: Schema, line: int) -> Dict[str, List[int]]:
    m = doc.mapping(node if node is not None else _Map(), "components", schema.tables)
    out = {}
    for t, ids in m.items():
        ids = doc.seq(ids, f"component {t!r}", doc.line_of(m, t))
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in ids):
            doc.fail(doc.line_of(m, t), f"component {t!r} must list part ids")
        out[t] = list(ids)
    return out


def _morphism(doc: _Doc, dom: ACSet, cod: ACSet, comps, line: int, what: str) -> ACSetMorphism:
    try:
        return infer_morphism(dom, cod, comps)
    except SchemaError as e:
        doc.fail(line, f"invalid {what}: {e}")


def _rule(doc: _Doc, node, schema: Schema, name: str = "") -> RewriteRule:
    m = doc.mapping(node, "rule", ("schema", "name", "semantics", "monic", "L", "K", "R", "l", "r",
                                   "agent_in", "agent_out", "exprs"), ("L", "K", "R", "l", "r"))
    L, K, R = (_instance(doc, m[k], schema, k) for k in ("L", "K", "R"))
    l = _morphism(doc, K, L, _components(doc, m["l"], schema, m.line), doc.line_of(m, "l"), "l")
    r = _morphism(doc, K, R, _components(doc, m["r"], schema, m.line), doc.line_of(m, "r"), "r")
    agents = {}
    for key, cod in (("agent_in", L), ("agent_out", R)):
        if key not in m:
            agents[key] = None
            continue
        a = doc.mapping(m[key], key, ("shape", "map"), ("shape", "map"))
        shape = _instance(doc, a["shape"], schema, f"{key} shape")
        agents[key] = _morphism(doc, shape, cod, _components(doc, a["map"], schema, a.line),
                                doc.line_of(a, "map"), key)
    exprs = {}
    for i, e in enumerate(doc.seq(m.get("exprs", _Seq()), "exprs", doc.line_of(m, "exprs"))):
        e = doc.mapping(e, "expression", ("attr", "part", "expr"), ("attr", "part", "expr"))
        exprs[(e["attr"], e["part"])] = str(e["expr"])
    sem = str(m.get("semantics", "dpo")).upper()
    try:
        rule = RewriteRule.build(L, K, R, l.components, r.components,
                                 agent_in=(agents["agent_in"].dom, agents["agent_in"].components)
                                 if agents["agent_in"] else None,
                                 agent_out=(agents["agent_out"].dom, agents["agent_out"].components)
                                 if agents["agent_out"] else None,
                                 exprs=exprs, semantics=sem, monic=bool(m.get("monic", False)),
                                 name=str(m.get("name", name)))
    except (SchemaError, ValueError) as e:
        doc.fail(m.line, f"invalid rule: {e}")
    return rule


def _functor(doc: _Doc, node) -> SchemaFunctor:
    m = doc.mapping(node, "functor", ("source", "target", "ob", "hom", "attr"),
                    ("source", "target", "ob"))
    F = SchemaFunctor(_schema(doc, m["source"]), _schema(doc, m["target"]), dict(m["ob"]),
                      dict(m.get("hom", {})), dict(m.get("attr", {})))
    problems = F.violations()
    if problems:
        doc.fail(m.line, "invalid functor: " + "; ".join(problems))
    return F


_BOX_FIELDS = {
    "rewrite": ("rule",), "weaken": ("dom", "cod", "map"), "strengthen": ("dom", "cod", "map"),
    "init": ("in", "dom", "cod", "map"), "fail": ("shape", "mode"),
    "control": ("shape", "n", "weights", "predicate", "label"), "query": ("A", "B", "C"),
}


def _endpoint(doc: _Doc, text, line: int) -> Tuple[str, str]:
    if not isinstance(text, str) or "." not in text:
        doc.fail(line, f"wire end {text!r} must look like box.port")
    box, port = text.rsplit(".", 1)
    return box, port


def _schedule(doc: _Doc, node) -> Schedule:
    m = doc.mapping(node, "schedule", ("schema", "name", "shapes", "rules", "inputs", "outputs",
                                       "boxes", "wires"), ("schema", "boxes", "wires"))
    schema = _schema(doc, m["schema"])
    shapes_node = doc.mapping(m.get("shapes", _Map()), "shapes", m.get("shapes", {}).keys())
    shapes = {k: _instance(doc, v, schema, f"shape {k!r}") for k, v in shapes_node.items()}

    def shape(name, line):
        if name not in shapes:
            doc.fail(line, f"unknown shape {name!r}")
        return shapes[name]

    rules_node = m.get("rules", _Map())
    rules = {k: _rule(doc, v, schema, k) for k, v in rules_node.items()}
    boxes = {}
    bnode = doc.mapping(m["boxes"], "boxes", m["boxes"].keys() if isinstance(m["boxes"], dict)
                        else ())
    for name, b in bnode.items():
        bl = doc.line_of(bnode, name)
        if not isinstance(b, _Map) or b.get("type") not in _BOX_FIELDS:
            doc.fail(bl, f"box {name!r} needs a type among {sorted(_BOX_FIELDS)}")
        typ = b["type"]
        b = doc.mapping(b, f"box {name!r}", ("type",) + _BOX_FIELDS[typ])
        ln = lambda k: doc.line_of(b, k)  # noqa: E731
        if typ == "rewrite":
            if b.get("rule") not in rules:
                doc.fail(ln("rule"), f"unknown rule {b.get('rule')!r}")
            boxes[name] = Rewrite(rules[b["rule"]])
        elif typ in ("weaken", "strengthen", "init"):
            need = _BOX_FIELDS[typ]
            for k in need:
                if k not in b:
                    doc.fail(b.line, f"box {name!r} is missing field {k!r}")
            f = _morphism(doc, shape(b["dom"], ln("dom")), shape(b["cod"], ln("cod")),
                          _components(doc, b["map"], schema, ln("map")), ln("map"), f"box {name!r}")
            boxes[name] = (Weaken(f) if typ == "weaken" else Strengthen(f) if typ == "strengthen"
                           else Init(f, shape(b["in"], ln("in"))))
        elif typ == "fail":
            mode = b.get("mode", "exception")
            if mode not in ("exception", "empty"):
                doc.fail(ln("mode"), "fail mode must be exception or empty")
            boxes[name] = Fail(shape(b.get("shape"), ln("shape")), mode)
        elif typ == "control":
            S = shape(b.get("shape"), ln("shape"))
            if ("weights" in b) == ("predicate" in b):
                doc.fail(b.line, f"box {name!r} needs exactly one of weights or predicate")
            try:
                if "weights" in b:
                    ws = [float(w) for w in b["weights"]]
                    if any(w < 0 for w in ws) or sum(ws) <= 0:
                        doc.fail(ln("weights"), "weights must be non-negative and not all zero")
                    boxes[name] = ControlFlow(S, weights=ws, label=str(b.get("label", "")))
                else:
                    boxes[name] = ControlFlow(S, 2, predicate=AgentTest(str(b["predicate"])),
                                              label=str(b.get("label", "")))
            except (TypeError, ValueError) as e:
                doc.fail(b.line, f"box {name!r}: {e}")
        else:
            boxes[name] = Query(shape(b.get("A"), ln("A")), shape(b.get("B"), ln("B")),
                                shape(b.get("C"), ln("C")))
    wires = []
    wnode = doc.seq(m["wires"], "wires", doc.line_of(m, "wires"))
    for i, w in enumerate(wnode):
        line = wnode.item_lines[i]
        if not isinstance(w, list) or len(w) != 2:
            doc.fail(line, "each wire is a pair [source, target]")
        wires.append((_endpoint(doc, w[0], line), _endpoint(doc, w[1], line)))
    ports = lambda key: {p: shape(v, doc.line_of(m.get(key), p))  # noqa: E731
                         for p, v in (m.get(key) or {}).items()}
    return Schedule(boxes, wires, ports("inputs"), ports("outputs"), str(m.get("name", "")))


# ---------------------------------------------------------------------------
# public loaders

KINDS = ("schema", "instance", "morphism", "rule", "functor", "schedule")


def _morphism_doc(doc, node):
    m = doc.mapping(node, "morphism", ("schema", "dom", "cod", "components"),
                    ("schema", "dom", "cod", "components"))
    s = _schema(doc, m["schema"])
    return _morphism(doc, _instance(doc, m["dom"], s, "dom"), _instance(doc, m["cod"], s, "cod"),
                     _components(doc, m["components"], s, m.line), m.line, "morphism")


def _load(kind: str, doc: _Doc, node):
    if kind == "schema":
        return _schema(doc, node)
    if kind == "instance":
        m = doc.mapping(node, "instance", ("schema", "parts"), ("schema",))
        return _instance(doc, m, _schema(doc, m["schema"]))
    if kind == "morphism":
        return _morphism_doc(doc, node)
    if kind == "rule":
        m = doc.mapping(node, "rule", ("schema", "name", "semantics", "monic", "L", "K", "R", "l",
                                       "r", "agent_in", "agent_out", "exprs"), ("schema",))
        return _rule(doc, m, _schema(doc, m["schema"]))
    if kind == "functor":
        return _functor(doc, node)
    if kind == "schedule":
        return _schedule(doc, node)
    raise ValueError(f"unknown file kind {kind!r}")


def loads(kind: str, text: str, name: str = "<input>", base: str = "."):
    doc, node = _parse_text(text, name, base)
    return _load(kind, doc, node)


def load(kind: str, path: str):
    doc, node = _read_file(path)
    return _load(kind, doc, node)


def guess_kind(path: str) -> str:
    """Classify a document by its top-level keys."""
    doc, node = _read_file(path)
    if not isinstance(node, dict):
        doc.fail(1, "document must be a mapping")
    keys = set(node)
    if "tables" in keys:
        return "schema"
    if "boxes" in keys:
        return "schedule"
    if "L" in keys:
        return "rule"
    if "ob" in keys:
        return "functor"
    if "components" in keys:
        return "morphism"
    if "parts" in keys or keys == {"schema"}:
        return "instance"
    doc.fail(node.line, "cannot tell what kind of file this is")


# ---------------------------------------------------------------------------
# writers (plain data; ``dumps`` renders YAML)

def schema_data(s: Schema) -> dict:
    out: Dict[str, Any] = {}
    if s.name:
        out["name"] = s.name
    out["tables"] = list(s.tables)
    if s.attr_types:
        out["attr_types"] = {n: k for n, k in s.attr_types}
    if s.homs:
        out["homs"] = {h: [a, b] for h, a, b in s.homs}
    if s.attrs:
        out["attrs"] = {a: [t, ty] for a, t, ty in s.attrs}
    return out


def _val(v):
    return {"var": v.id} if isinstance(v, Var) else v


def instance_data(X: ACSet, with_schema: bool = True) -> dict:
    s = X.schema
    parts = {}
    for t in s.tables:
        cols = s.homs_out[t] + s.attrs_of[t]
        n = X.nparts(t)
        if not cols:
            if n:
                parts[t] = n
            continue
        if n:
            parts[t] = [{c: (X.hom(c)[p] if c in s.hom_src else _val(X.attr(c)[p])) for c in cols}
                        for p in range(n)]
    out = {"schema": schema_data(s)} if with_schema else {}
    out["parts"] = parts
    return out


def _comps(f) -> dict:
    return {t: list(c) for t, c in f.components.items() if c}


def morphism_data(f: ACSetMorphism) -> dict:
    return {"schema": schema_data(f.dom.schema), "dom": instance_data(f.dom, False),
            "cod": instance_data(f.cod, False), "components": _comps(f)}


def rule_data(rule: RewriteRule, with_schema: bool = True) -> dict:
    out = {"schema": schema_data(rule.L.schema)} if with_schema else {}
    if rule.name:
        out["name"] = rule.name
    out["semantics"] = rule.semantics.lower()
    out["monic"] = rule.monic
    for k, X in (("L", rule.L), ("K", rule.K), ("R", rule.R)):
        out[k] = instance_data(X, False)
    out["l"], out["r"] = _comps(rule.l), _comps(rule.r)
    out["agent_in"] = {"shape": instance_data(rule.A, False), "map": _comps(rule.agent_in)}
    out["agent_out"] = {"shape": instance_data(rule.B, False), "map": _comps(rule.agent_out)}
    if rule.exprs:
        out["exprs"] = [{"attr": a, "part": p, "expr": format_expr(e)}
                        for (a, p), e in sorted(rule.exprs.items())]
    return out


def functor_data(F: SchemaFunctor) -> dict:
    return {"source": schema_data(F.source), "target": schema_data(F.target), "ob": dict(F.ob),
            "hom": dict(F.hom), "attr": dict(F.attr)}


def schedule_data(s: Schedule) -> dict:
    """Shapes are deduplicated and named ``S0, S1, ...``; rules by box."""
    shapes: List[ACSet] = []

    def ref(X):
        for i, Y in enumerate(shapes):
            if Y == X:
                return f"S{i}"
        shapes.append(X)
        return f"S{len(shapes) - 1}"

    rules, boxes = {}, {}
    for name, g in s.boxes.items():
        if isinstance(g, Rewrite):
            rules[name] = rule_data(g.rule, False)
            boxes[name] = {"type": "rewrite", "rule": name}
        elif isinstance(g, (Weaken, Strengthen, Init)):
            f = g.a0 if isinstance(g, Init) else g.f
            typ = {Weaken: "weaken", Strengthen: "strengthen", Init: "init"}[type(g)]
            box = {"type": typ}
            if isinstance(g, Init):
                box["in"] = ref(g.in_shape)
            box.update(dom=ref(f.dom), cod=ref(f.cod), map=_comps(f))
            boxes[name] = box
        elif isinstance(g, Fail):
            boxes[name] = {"type": "fail", "shape": ref(g.shape), "mode": g.mode}
        elif isinstance(g, ControlFlow):
            box = {"type": "control", "shape": ref(g.shape)}
            if g.predicate is None:
                box["weights"] = list(g.weights)
            elif isinstance(g.predicate, AgentTest):
                box["predicate"] = g.predicate.expr
            else:
                raise ValueError(f"box {name!r} has a predicate that cannot be written to a file")
            if g.label:
                box["label"] = g.label
            boxes[name] = box
        elif isinstance(g, Query):
            boxes[name] = {"type": "query", "A": ref(g.A), "B": ref(g.B), "C": ref(g.C)}
    inputs = {p: ref(X) for p, X in s.inputs.items()}
    outputs = {p: ref(X) for p, X in s.outputs.items()}
    out = {"schema": schema_data(s.schema)}
    if s.name:
        out["name"] = s.name
    out["shapes"] = {f"S{i}": instance_data(X, False) for i, X in enumerate(shapes)}
    if rules:
        out["rules"] = rules
    out.update(inputs=inputs, outputs=outputs, boxes=boxes,
               wires=[[f"{a[0]}.{a[1]}", f"{b[0]}.{b[1]}"] for a, b in s.wires])
    return out


def to_data(obj) -> dict:
    if isinstance(obj, Schema):
        return schema_data(obj)
    if isinstance(obj, ACSet):
        return instance_data(obj)
    if isinstance(obj, ACSetMorphism):
        return morphism_data(obj)
    if isinstance(obj, RewriteRule):
        return rule_data(obj)
    if isinstance(obj, SchemaFunctor):
        return functor_data(obj)
    if isinstance(obj, Schedule):
        return schedule_data(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return yaml.safe_dump(to_data(obj), sort_keys=False, default_flow_style=None, width=100)


def dump(obj, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def report_json(data: Mapping) -> str:
    """Canonical report text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# DOT

def _q(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _box_label(name: str, g) -> str:
    if isinstance(g, Rewrite):
        return f"{name}\\nrewrite {g.rule.name}".rstrip()
    if isinstance(g, ControlFlow):
        how = g.predicate.expr if isinstance(g.predicate, AgentTest) else (
            "predicate" if g.predicate else ", ".join(f"{w:g}" for w in g.weights))
        return f"{name}\\ncontrol [{how}]"
    return f"{name}\\n{type(g).__name__.lower()}"


def schedule_dot(s: Schedule) -> str:
    lines = [f"digraph {_q(s.name or 'schedule')} {{", "  rankdir=LR;", "  node [shape=box];"]
    for p in s.inputs:
        lines.append(f"  {_q('in:' + p)} [shape=circle, label={_q(p)}];")
    for p in s.outputs:
        lines.append(f"  {_q('out:' + p)} [shape=doublecircle, label={_q(p)}];")
    for name, g in s.boxes.items():
        lines.append(f"  {_q(name)} [label={_q(_box_label(name, g))}];")
    for (a, ap), (b, bp) in s.wires:
        src = _q("in:" + ap) if a == OUTER else _q(a)
        tgt = _q("out:" + bp) if b == OUTER else _q(b)
        label = ap if b == OUTER or a == OUTER else f"{ap}->{bp}"
        lines.append(f"  {src} -> {tgt} [label={_q(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def instance_dot(X: ACSet) -> str:
    s = X.schema
    lines = [f"digraph {_q(s.name or 'instance')} {{", "  node [shape=record];"]
    for t in s.tables:
        for p in range(X.nparts(t)):
            attrs = "".join(f"|{a}={_fmt(X.attr(a)[p])}" for a in s.attrs_of[t])
            lines.append(f"  {_q(f'{t}{p}')} [label={_q('{' + f'{t} {p}' + attrs + '}')}];")
    for h, src, tgt in s.homs:
        for p, q in enumerate(X.hom(h)):
            lines.append(f"  {_q(f'{src}{p}')} -> {_q(f'{tgt}{q}')} [label={_q(h)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return f"v{v.id}" if isinstance(v, Var) else str(v)


def to_dot(obj) -> str:
    if isinstance(obj, Schedule):
        return schedule_dot(obj)
    if isinstance(obj, ACSet):
        return instance_dot(obj)
    raise TypeError(f"cannot export {type(obj).__name__} to DOT")


def load_agent(path: Optional[str], world: ACSet) -> ACSetMorphism:
    """Agent file: a morphism whose codomain must equal ``world``."""
    if path is None:
        return initial_morphism(world)
    f = load("morphism", path)
    if f.cod != world:
        raise FormatError(f"{path}:1: agent codomain is not the given world")
    return f
