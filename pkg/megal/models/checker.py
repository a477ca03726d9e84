"""
Well-formedness checks over a linked megamodel. Nothing here touches
artifacts; binding URIs are only checked for syntax.
"""

from __future__ import annotations

import logging
from collections import Counter

import networkx as nx

from ..exceptions.exception import MalformedUri
from .diagnostics import Diagnostic, error, warning
from .megamodel import FuncApp, Megamodel, OriginKind, RelStmt, subtype_of
from .resolver.uri import parse_uri

log = logging.getLogger(__name__)

_ANNOTATION_TYPES = ("Concept", "Language", "Technology")


def type_of(model: Megamodel, name: str) -> str:
    return model.entity(name).type


def _subtype(model: Megamodel, a: str, b: str) -> bool:
    return model.types.has_type(a) and model.types.has_type(b) and subtype_of(model.types, a, b)


def check_relationship(model: Megamodel, rel: RelStmt) -> Diagnostic | None:
    """None when some signature of the predicate accepts the operand types (overloads in order)."""
    rt = model.types.relationship_types.get(rel.predicate)
    if rt is None:
        return error("E004", f"unknown relationship type '{rel.predicate}'", rel.span)
    left, right = type_of(model, rel.subject), type_of(model, rel.object)
    for sig_left, sig_right in rt.signatures:
        if _subtype(model, left, sig_left) and _subtype(model, right, sig_right):
            return None
    if rel.predicate == "facilitates" and not model.is_a(rel.object, "Concept"):
        return warning("W102", f"'{rel.object}' is facilitated but is a {right}, not a Concept", rel.span)
    shown = " | ".join(f"{l} * {r}" for l, r in rt.signatures)
    return error("E003", f"'{rel}' has operand types {left} * {right}; {rel.predicate} expects {shown}", rel.span)


def _membership(model: Megamodel) -> set[tuple[str, str]]:
    """(x, L) pairs derivable from elementOf plus subsetOf chains."""
    lattice = nx.DiGraph()
    lattice.add_edges_from((s.subject, s.object) for s in model.relations("subsetOf"))
    pairs = set()
    for s in model.relations("elementOf"):
        pairs.add((s.subject, s.object))
        if s.object in lattice:
            pairs.update((s.subject, sup) for sup in nx.descendants(lattice, s.object))
    return pairs


def _check_application(model: Megamodel, app: FuncApp, membership) -> list[Diagnostic]:
    out = []
    for name in (app.function, app.input, app.output):
        if not model.has_name(name):
            out.append(error("E001", f"unknown name '{name}'", app.span))
    if out:
        return out
    fn = model.functions.get(app.function)
    if fn is None:
        return [error("E005", f"'{app.function}' is a {type_of(model, app.function)}, not a Function", app.span)]
    if (app.input, fn.domain) not in membership:
        out.append(warning("W101", f"no derivable '{app.input} elementOf {fn.domain}' for input of {app.function}", app.span))
    if (app.output, fn.range) not in membership:
        out.append(warning("W101", f"no derivable '{app.output} elementOf {fn.range}' for output of {app.function}", app.span))
    return out


def check_well_formed(model: Megamodel) -> list[Diagnostic]:
    diagnostics: list[Diagnostic] = []

    for ent in model.entities.values():
        if not model.types.has_type(ent.type):
            diagnostics.append(error("E001", f"unknown entity type '{ent.type}' of '{ent.name}'", ent.span))

    for fn in model.functions.values():
        for role, name in (("domain", fn.domain), ("range", fn.range)):
            if not model.has_name(name):
                diagnostics.append(error("E001", f"unknown name '{name}'", fn.span))
            elif not model.is_a(name, "Language"):
                diagnostics.append(error("E008", f"{role} '{name}' of function '{fn.name}' is not a Language", fn.span))

    for rel in model.statements:
        missing = [n for n in (rel.subject, rel.object) if not model.has_name(n)]
        if missing:
            diagnostics.extend(error("E001", f"unknown name '{n}'", rel.span) for n in missing)
            continue
        found = check_relationship(model, rel)
        if found is not None:
            diagnostics.append(found)
        elif rel.predicate == "uses" and not any(model.is_a(rel.object, t) for t in _ANNOTATION_TYPES):
            diagnostics.append(warning("W104", f"'{rel.object}' is used but is neither a Concept, Language nor Technology", rel.span))

    membership = _membership(model)
    for app in model.applications:
        diagnostics.extend(_check_application(model, app, membership))

    per_slot = Counter()
    for b in model.bindings:
        if not model.has_name(b.subject):
            diagnostics.append(error("E001", f"unknown name '{b.subject}'", b.span))
            continue
        per_slot[(b.subject, b.slot)] += 1
        if per_slot[(b.subject, b.slot)] == 2 and not model.entities[b.subject].many:
            diagnostics.append(error("E006", f"'{b.subject}' is cardinality-one but has several {b.slot} bindings", b.span))
        if b.slot == "locator":
            try:
                parse_uri(b.uri)
            except MalformedUri as exc:
                diagnostics.append(error("E007", f"malformed binding URI for '{b.subject}': {exc.message}", b.span))

    bound = {b.subject for b in model.bindings if b.slot == "locator"}
    for ent in model.entities.values():
        if ent.origin.kind in (OriginKind.REFLECTED, OriginKind.INFERRED) or ent.name in bound:
            continue
        if model.is_a(ent.name, "Artifact") and not model.is_a(ent.name, "Plugin"):
            diagnostics.append(warning("W103", f"'{ent.name}' has no binding; verification will be partial", ent.span))

    log.info("checked %s: %d diagnostics", model.name, len(diagnostics))
    return diagnostics
