from __future__ import annotations

import json
from pathlib import Path

from .evaluation import as_relationship
from .inference import children_of
from .megamodel import FuncApp
from .pipeline import PipelineResult
from .resolver import BindingTable
from .trace import TRACE_ORIGIN


def _relative(path: Path | None, root: Path) -> str | None:
    if path is None:
        return None
    try:
        return path.resolve().relative_to(root).as_posix()
    except ValueError:
        return path.as_posix()


def _binding_entry(name: str, uri: str, table: BindingTable | None) -> dict:
    entry = {"uri": uri, "resolvedPath": None, "identity": None, "children": []}
    objs = table.for_binding(name, uri) if table is not None else []
    if len(objs) != 1:
        return entry
    obj = objs[0]
    entry["resolvedPath"] = _relative(obj.resolved_path, table.workspace.root)
    entry["identity"] = obj.path
    entry["children"] = [path for path, _ in children_of(table, obj)]
    return entry


def exploration_index(result: PipelineResult) -> dict:
    """
    Everything an editor needs to navigate the model: declarations,
    binding resolutions and fragment children, statement statuses and
    trace links.
    """
    model, table, report = result.model, result.table, result.report
    if model is None:
        return {"entities": [], "statements": [], "traces": [], "diagnostics": [d.to_dict() for d in result.diagnostics]}

    entities = []
    for ent in sorted(model.entities.values(), key=lambda e: e.name):
        entities.append({
            "name": ent.name,
            "type": ent.type,
            "cardinality": ent.cardinality,
            "origin": str(ent.origin),
            "declSpan": ent.span.to_dict() if ent.span else None,
            "unresolved": bool(table and table.is_unresolved(ent.name)),
            "bindings": [
                _binding_entry(ent.name, b.uri, table) if b.slot == "locator" else {"uri": b.uri, "resolvedPath": None, "identity": None, "children": []}
                for b in model.bindings_of(ent.name, None)
            ],
        })

    statements = []
    # trace links are listed under "traces", never as statements
    for stmt in [s for s in model.statements if s.origin != TRACE_ORIGIN] + list(model.applications):
        rel = as_relationship(stmt)
        found = report.find(*rel.key) if report is not None else None
        statements.append({
            "subject": rel.subject,
            "predicate": rel.predicate,
            "object": rel.object,
            "kind": "application" if isinstance(stmt, FuncApp) else "relationship",
            "origin": str(stmt.origin),
            "span": stmt.span.to_dict() if stmt.span else None,
            "status": found.status.value if found else None,
            "messages": [m.to_dict() for m in found.messages] if found else [],
        })

    traces = sorted((g.to_dict(model) for g in result.traces), key=lambda t: (t["owner"]["subject"], t["owner"]["object"]))
    return {
        "module": model.name,
        "entities": entities,
        "statements": statements,
        "traces": traces,
        "diagnostics": [d.to_dict() for d in result.diagnostics],
    }


def exploration_json(result: PipelineResult) -> str:
    return json.dumps(exploration_index(result), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
