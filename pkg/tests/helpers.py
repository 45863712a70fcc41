"""Small graph fixtures shared by the tests."""
from __future__ import annotations

from dyntrace.schema import ACSet, ACSetBuilder, Schema, Var, infer_morphism

GRAPH = Schema(("V", "E"), (), (("src", "E", "V"), ("tgt", "E", "V")), (), name="Graph")

NAMED = Schema(("V", "E"), (("Name", "str"),), (("src", "E", "V"), ("tgt", "E", "V")),
               (("name", "V", "Name"),), name="NamedGraph")


def graph(nv: int, edges=(), schema: Schema = GRAPH, names=None) -> ACSet:
    """``nv`` vertices and the given ``(src, tgt)`` edges.

    ``names`` (only for ``NAMED``) gives each vertex's name; a missing list
    means fresh variables.
    """
    b = ACSetBuilder(schema)
    for i in range(nv):
        if schema is NAMED:
            b.add_part("V", name=names[i] if names is not None else Var(i))
        else:
            b.add_part("V")
    for s, t in edges:
        b.add_part("E", src=s, tgt=t)
    return b.build()


def hom(dom: ACSet, cod: ACSet, **comps):
    full = {t: comps.get(t, ()) for t in dom.schema.tables}
    return infer_morphism(dom, cod, full)


def names(X: ACSet):
    return list(X.attr("name"))
