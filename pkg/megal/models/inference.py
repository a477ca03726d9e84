"""
Fixed-point model inference.

Inferrers only ever add elements. Each round applies every active inferrer
to every element of the current revision, sorts the additions canonically
and inserts them; a round that adds nothing ends the run.
"""

from __future__ import annotations

import json
import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions.exception import FixedPointNotReached, MegalException
from .diagnostics import Diagnostic, warning
from .evaluation import BUILTIN_SCHEMES, Registry
from .linker import DATA_DIR
from .megamodel import Binding, Element, Entity, Megamodel, Origin, OriginKind, RelStmt, canonical_key
from .resolver import BindingTable, Kind, ResourceObject
from .resolver.objects import try_parse_xml
from .resolver.uri import split_scheme

log = logging.getLogger(__name__)

KNOWLEDGE_MAP = DATA_DIR / "knowledge_map.json"


@dataclass
class Inference:
    additions: list[Element] = field(default_factory=list)
    messages: list[Diagnostic] = field(default_factory=list)


class Inferrer(ABC):
    name = "inferrer"
    # entity types this inferrer was registered for; empty means every element
    scope: tuple[str, ...] = ()

    @abstractmethod
    def applies_to(self, element: Element) -> bool: ...

    @abstractmethod
    def infer(self, model: Megamodel, table: BindingTable | None, element: Element) -> Inference: ...

    @property
    def origin(self) -> Origin:
        return Origin.inferred(self.name)

    def in_scope(self, model: Megamodel, element: Element) -> bool:
        if not self.scope:
            return True
        return isinstance(element, Entity) and any(model.is_a(element.name, t) for t in self.scope)


@dataclass(frozen=True)
class EngineConfig:
    max_rounds: int = 100

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass
class InferenceResult:
    model: Megamodel
    rounds: int
    added: int
    diagnostics: list[Diagnostic] = field(default_factory=list)


# ---------- closure rules ----------

class SubsetTransitivity(Inferrer):
    """a subsetOf b, b subsetOf c => a subsetOf c"""

    name = "subsetTransitivity"

    def applies_to(self, element):
        return isinstance(element, RelStmt) and element.predicate == "subsetOf"

    def infer(self, model, table, element):
        return Inference([
            RelStmt(element.subject, "subsetOf", s.object, self.origin)
            for s in model.relations("subsetOf")
            if s.subject == element.object
        ])


class ElementOfLifting(Inferrer):
    """x elementOf L, L subsetOf M => x elementOf M"""

    name = "elementOfLifting"

    def applies_to(self, element):
        return isinstance(element, RelStmt) and element.predicate == "elementOf"

    def infer(self, model, table, element):
        return Inference([
            RelStmt(element.subject, "elementOf", s.object, self.origin)
            for s in model.relations("subsetOf")
            if s.subject == element.object
        ])


# ---------- parts ----------

_UNSAFE = re.compile(r"[^A-Za-z0-9_]")


def fragment_name(parent: str, segment: str) -> str:
    return f"{parent}_{_UNSAFE.sub('_', segment)}"


def fragment_uri(parent_uri: str, segment: str) -> str:
    return f"{parent_uri.rstrip('/')}/{segment}" if parent_uri.rstrip("/") else segment


def _leaf(uri: str) -> str:
    return uri.rstrip("/").rsplit("/", 1)[-1].split(":", 1)[-1]


def children_of(table: BindingTable, obj: ResourceObject) -> list[tuple[str, ResourceObject]]:
    """
    Decomposable children of `obj` as (relative URI path, object) pairs.
    A document is decomposed through its root element, so the path of a
    child carries the root segment as well.
    """
    if obj.kind not in (Kind.DIRECTORY, Kind.ARCHIVE, Kind.XML_DOCUMENT, Kind.XML_ELEMENT, Kind.TRANSIENT):
        return []
    providers = table.workspace.providers
    if obj.kind in (Kind.XML_DOCUMENT, Kind.TRANSIENT):
        if try_parse_xml(obj.content()) is None:
            return []
        xml = next(p for p in providers if p.name == "xml")
        (root_key,) = xml.next(obj)
        (root,) = xml.navigate(obj, root_key)
        return [(f"{root_key}/{path}", child) for path, child in children_of(table, root)]
    for provider in providers:
        if provider.accept(obj):
            return [
                (child.identity[-1], child)
                for key in provider.next(obj)
                for child in provider.navigate(obj, key)
            ]
    return []


class PartInferrer(Inferrer):
    """
    Decomposes bound artifacts into fragment entities, each with a
    `partOf` to its parent and a binding extending the parent's URI.
    """

    name = "parts"

    def __init__(self, max_depth: int = 3):
        self.max_depth = max_depth

    def applies_to(self, element):
        return isinstance(element, Entity)

    def _depth(self, model: Megamodel, name: str) -> int:
        depth = 0
        while True:
            ent = model.entities.get(name)
            if ent is None or ent.origin != self.origin:
                return depth
            parent = next((s.object for s in model.statements if s.subject == name and s.predicate == "partOf" and s.origin == self.origin), None)
            if parent is None:
                return depth
            depth, name = depth + 1, parent

    def infer(self, model, table, element):
        if table is None or not model.is_a(element.name, "Artifact") or model.is_a(element.name, "Plugin"):
            return Inference()
        resolved = table.singles(element.name)
        if not resolved or self._depth(model, element.name) >= self.max_depth:
            return Inference()

        additions: list[Element] = []
        taken: set[str] = set()
        for parent_uri, obj in resolved:
            for path, _child in children_of(table, obj):
                segment = path.split("/", 1)[-1] if obj.kind in (Kind.XML_DOCUMENT, Kind.TRANSIENT) else path
                if len(resolved) > 1:
                    # several bound objects: the binding's leaf keeps their fragments apart
                    segment = f"{_leaf(parent_uri)}/{segment}"
                name = fragment_name(element.name, segment)
                uri = fragment_uri(parent_uri, path)
                # keep names unique against siblings and unrelated declarations
                while name in taken or (model.has_name(name) and not any(b.uri == uri for b in model.bindings_of(name))):
                    name += "_"
                taken.add(name)
                additions += [
                    Entity(name, "Artifact", False, self.origin),
                    RelStmt(name, "partOf", element.name, self.origin),
                    Binding(name, uri, self.origin),
                ]
        return Inference(additions)


# ---------- annotations ----------

def load_knowledge_map(path: str | Path | None = None) -> dict[str, str]:
    path = Path(path) if path else KNOWLEDGE_MAP
    data = json.loads(path.read_text(encoding="utf-8"))
    return {str(k): str(v) for k, v in data.items()}


class AnnotationScheme(Inferrer):
    """Links unbound languages, technologies and concepts to an offline knowledge map."""

    name = "annotationScheme"

    def __init__(self, knowledge_map: dict[str, str] | None = None):
        self.knowledge_map = knowledge_map if knowledge_map is not None else load_knowledge_map()

    def applies_to(self, element):
        return isinstance(element, Entity) and element.name in self.knowledge_map

    def infer(self, model, table, element):
        if not any(model.is_a(element.name, t) for t in ("Language", "Technology", "Concept")):
            return Inference()
        if model.bindings_of(element.name):
            return Inference()
        return Inference([Binding(element.name, self.knowledge_map[element.name], self.origin)])


INFERRERS = {
    SubsetTransitivity.name: SubsetTransitivity,
    ElementOfLifting.name: ElementOfLifting,
    PartInferrer.name: PartInferrer,
    AnnotationScheme.name: AnnotationScheme,
}


CLOSURE_RULES = (SubsetTransitivity, ElementOfLifting)


def registered_inferrers(
    registry: Registry,
    model: Megamodel,
    *,
    part_depth: int = 3,
    knowledge_map: dict[str, str] | None = None,
) -> list[Inferrer]:
    """
    The closure rules always run. Part inference and the annotation scheme
    run only where a plugin tree registered for an entity type
    (`Artifact evaluatedBy PartInferer`) holds their implementation, and
    only on entities of those types.
    """
    scopes: dict[str, list[str]] = {}
    for type_name, roots in sorted(registry.roots.items()):
        if not model.types.has_type(type_name):
            continue
        for node in (n for root in roots for n in root.walk()):
            scheme, rest = split_scheme(node.implementation)
            if scheme in BUILTIN_SCHEMES and rest in INFERRERS:
                scopes.setdefault(rest, [])
                if type_name not in scopes[rest]:
                    scopes[rest].append(type_name)

    inferrers: list[Inferrer] = [rule() for rule in CLOSURE_RULES]
    for name, types in sorted(scopes.items()):
        if name == PartInferrer.name:
            inferrer: Inferrer = PartInferrer(part_depth)
        elif name == AnnotationScheme.name:
            inferrer = AnnotationScheme(knowledge_map)
        else:
            continue
        inferrer.scope = tuple(types)
        inferrers.append(inferrer)
    log.debug("inferrers: %s", ", ".join(f"{i.name}{list(i.scope) or ''}" for i in inferrers))
    return inferrers


# ---------- engine ----------

def run_inference(
    model: Megamodel,
    table: BindingTable | None,
    inferrers: list[Inferrer],
    cfg: EngineConfig = EngineConfig(),
) -> InferenceResult:
    """
    Runs rounds until one adds nothing (that round counts). A faulting
    inferrer is reported as I001 and skipped for the rest of the run.
    """
    active = list(inferrers)
    diagnostics: list[Diagnostic] = []
    added = 0

    for round_no in range(1, cfg.max_rounds + 1):
        additions: list[Element] = []
        for inferrer in list(active):
            try:
                for element in model.elements():
                    if inferrer.applies_to(element) and inferrer.in_scope(model, element):
                        result = inferrer.infer(model, table, element)
                        additions.extend(result.additions)
                        diagnostics.extend(result.messages)
            except Exception as exc:  # plugin code may fail in any way
                log.warning("inferrer %s failed: %s", inferrer.name, exc)
                diagnostics.append(warning("I001", f"inferrer '{inferrer.name}' failed and was disabled: {exc}"))
                active.remove(inferrer)
                additions = [a for a in additions if a.origin != inferrer.origin]

        before = model.size()
        for item in sorted(additions, key=canonical_key):
            try:
                model = model.extend([item])
            except MegalException as exc:
                diagnostics.append(warning("I001", f"rejected addition from '{item.origin.source}': {exc.message}"))
        gained = model.size() - before
        added += gained

        if table is not None:
            diagnostics.extend(table.refresh(model))
        log.debug("inference round %d added %d elements", round_no, gained)
        if gained == 0:
            log.info("inference reached a fixed point after %d rounds (%d added)", round_no, added)
            return InferenceResult(model, round_no, added, diagnostics)

    raise FixedPointNotReached(cfg.max_rounds)


def inferred(model: Megamodel) -> list[Element]:
    return [e for e in model.elements() if e.origin.kind is OriginKind.INFERRED]
