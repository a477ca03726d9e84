from __future__ import annotations

import json

import graphviz

from ..exceptions.exception import UnsupportedFormat
from .megamodel import Megamodel, canonical_dict, is_prelude_element
from .trace import TRACE_ORIGIN, TraceGraph

FORMATS = ("dot", "json")

# nearest matching ancestor decides the shape
_SHAPES = {
    "Transient": "note",
    "Plugin": "component",
    "Artifact": "box",
    "Language": "ellipse",
    "Function": "diamond",
    "Technology": "hexagon",
    "Concept": "octagon",
    "EntityType": "plaintext",
    "RelationshipType": "plaintext",
}


def _shape(model: Megamodel, type_name: str) -> str:
    if not model.types.has_type(type_name):
        return "ellipse"
    return next((_SHAPES[t] for t in model.types.ancestors(type_name) if t in _SHAPES), "ellipse")


def to_dot(model: Megamodel, traces: list[TraceGraph] = (), include_prelude: bool = False) -> str:
    keep = (lambda e: True) if include_prelude else (lambda e: not is_prelude_element(model, e))
    dot = graphviz.Digraph(name=model.name, comment=f"megamodel {model.name}")
    dot.attr(rankdir="LR", fontname="Helvetica")
    dot.attr("node", fontname="Helvetica")

    for ent in sorted(model.entities.values(), key=lambda e: e.name):
        if keep(ent):
            dot.node(ent.name, f"{ent.name} : {ent.type}{'+' if ent.many else ''}", shape=_shape(model, ent.type))

    for s in sorted(model.statements, key=lambda s: s.key):
        if keep(s) and s.origin != TRACE_ORIGIN:
            dot.edge(s.subject, s.object, label=s.predicate)
    for a in sorted(model.applications, key=lambda a: a.key):
        if keep(a):
            dot.edge(a.input, a.output, label=a.function, style="bold")
    for graph in traces:
        for link in sorted(graph.links, key=lambda l: (l.left, l.right)):
            dot.edge(link.left, link.right, label="correspondsTo", style="dashed")
    return dot.source


def to_json(model: Megamodel, traces: list[TraceGraph] = (), include_prelude: bool = False) -> str:
    data = canonical_dict(model, include_prelude)
    data["traces"] = sorted(
        (g.to_dict(model) for g in traces),
        key=lambda t: (t["owner"]["subject"], t["owner"]["object"]),
    )
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def export_graph(model: Megamodel, traces: list[TraceGraph] = (), fmt: str = "dot", include_prelude: bool = False) -> str:
    if fmt == "dot":
        return to_dot(model, traces, include_prelude)
    if fmt == "json":
        return to_json(model, traces, include_prelude)
    raise UnsupportedFormat(f"unsupported format '{fmt}' (choose from {', '.join(FORMATS)})")
