"""
Cascaded URI resolution and the binding table handed to inference and
evaluation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ...exceptions.exception import AmbiguousSegment, MegalException, NoProviderAccepts, SegmentNotFound
from ..diagnostics import Diagnostic, error
from ..megamodel import Binding, Megamodel
from .objects import ResourceObject
from .uri import parse_uri
from .workspace import Workspace

log = logging.getLogger(__name__)


def resolve(workspace: Workspace, uri: str, *, many: bool = True) -> list[ResourceObject]:
    """
    Walks `uri` segment by segment from the workspace (or alias) root. For
    each segment the first registered provider that accepts the current
    object and offers the segment navigates it. Without `#k`, several
    same-named candidates form a set result, or raise AmbiguousSegment
    when `many` is false.
    """
    parsed = parse_uri(uri)
    frontier = [workspace.root_object(parsed.scheme)]
    for seg in parsed.segments:
        found_all: list[ResourceObject] = []
        for obj in frontier:
            accepting = [p for p in workspace.providers if p.accept(obj)]
            if not accepting:
                raise NoProviderAccepts(f"no provider can navigate '{obj.path or '.'}' ({obj.kind.value})")
            provider = next((p for p in accepting if seg.name in p.next(obj)), None)
            if provider is None:
                candidates = sorted({k for p in accepting for k in p.next(obj)})
                raise SegmentNotFound(seg.name, candidates)
            found = provider.navigate(obj, seg.name)
            if seg.index is not None:
                if seg.index >= len(found):
                    raise SegmentNotFound(str(seg), [f"{seg.name}#{i}" for i in range(len(found))])
                found = [found[seg.index]]
            elif len(found) > 1 and not many:
                raise AmbiguousSegment(f"segment '{seg.name}' matches {len(found)} objects; add '#k' to pick one")
            found_all.extend(found)
        frontier = found_all
    return frontier


@dataclass
class BindingTable:
    """entity name -> resolved objects; entities whose binding failed are Unresolved."""

    workspace: Workspace
    objects: dict[str, list[ResourceObject]] = field(default_factory=dict)
    unresolved: set[str] = field(default_factory=set)
    # entity -> binding URI -> objects, in binding order
    by_binding: dict[str, dict[str, list[ResourceObject]]] = field(default_factory=dict)
    _attempted: set[tuple[str, str]] = field(default_factory=set)

    def get(self, name: str) -> list[ResourceObject]:
        return self.objects.get(name, [])

    def single(self, name: str) -> ResourceObject | None:
        objs = self.get(name)
        return objs[0] if len(objs) == 1 else None

    def for_binding(self, name: str, uri: str) -> list[ResourceObject]:
        return self.by_binding.get(name, {}).get(uri, [])

    def singles(self, name: str) -> list[tuple[str, ResourceObject]]:
        """(binding URI, object) for every binding of `name` that resolved to exactly one object."""
        return [(uri, objs[0]) for uri, objs in self.by_binding.get(name, {}).items() if len(objs) == 1]

    def is_unresolved(self, name: str) -> bool:
        return name in self.unresolved

    def is_bound(self, name: str) -> bool:
        return name in self.objects

    def refresh(self, model: Megamodel) -> list[Diagnostic]:
        """Resolves the bindings of `model` not attempted yet (e.g. inferred fragments)."""
        diagnostics: list[Diagnostic] = []
        for binding in model.bindings:
            if binding.slot != "locator" or (binding.subject, binding.uri) in self._attempted:
                continue
            if not resolvable(model, binding.subject):
                continue
            self._attempted.add((binding.subject, binding.uri))
            diagnostics.extend(self._resolve_binding(model, binding))
        return diagnostics

    def _resolve_binding(self, model: Megamodel, binding: Binding) -> list[Diagnostic]:
        entity = model.entities[binding.subject]
        try:
            found = resolve(self.workspace, binding.uri, many=entity.many)
        except MegalException as exc:
            self.unresolved.add(binding.subject)
            self.objects.pop(binding.subject, None)
            self.by_binding.pop(binding.subject, None)
            log.debug("binding %s = %s unresolved: %s", binding.subject, binding.uri, exc.message)
            diag = exc.to_diagnostic()
            return [Diagnostic(diag.code, diag.severity, f"cannot resolve '{binding.uri}' for '{binding.subject}': {exc.message}", binding.span)]
        if binding.subject in self.unresolved:
            return []
        self.by_binding.setdefault(binding.subject, {})[binding.uri] = list(found)
        current = self.objects.setdefault(binding.subject, [])
        current.extend(o for o in found if o not in current)
        if not entity.many and len(current) != 1:
            self.unresolved.add(binding.subject)
            del self.objects[binding.subject]
            del self.by_binding[binding.subject]
            return [error("E201", f"'{binding.subject}' is cardinality-one but its binding resolves to {len(current)} objects", binding.span)]
        return []


def resolvable(model: Megamodel, name: str) -> bool:
    """Artifact-typed, non-plugin entities are fetched; other bindings are annotations."""
    return model.is_a(name, "Artifact") and not model.is_a(name, "Plugin")


def resolve_all_bindings(model: Megamodel, workspace: Workspace) -> tuple[BindingTable, list[Diagnostic]]:
    table = BindingTable(workspace)
    diagnostics = table.refresh(model)
    log.info("resolved %d bindings, %d unresolved", len(table.objects), len(table.unresolved))
    return table, diagnostics
