"""
Semantic megamodel: entity and relationship types, entities, statements,
functions and bindings.

A `Megamodel` is a value. Every change (`extend`, `add_statement`, `reflect`)
returns a new revision, and revisions only ever grow.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Union

from ..exceptions.exception import ConflictingDeclaration, UnknownName, UnknownType
from .diagnostics import SourceSpan

log = logging.getLogger(__name__)

ROOT_TYPE = "Entity"
MARKER_SCHEME = "builtin-lang"


class OriginKind(str, Enum):
    DECLARED = "declared"
    IMPORTED = "imported"
    INFERRED = "inferred"
    REFLECTED = "reflected"


@dataclass(frozen=True)
class Origin:
    kind: OriginKind = OriginKind.DECLARED
    source: str | None = None

    @classmethod
    def declared(cls) -> "Origin":
        return cls(OriginKind.DECLARED)

    @classmethod
    def imported(cls, module: str) -> "Origin":
        return cls(OriginKind.IMPORTED, module)

    @classmethod
    def inferred(cls, rule: str) -> "Origin":
        return cls(OriginKind.INFERRED, rule)

    @classmethod
    def reflected(cls) -> "Origin":
        return cls(OriginKind.REFLECTED)

    def __str__(self):
        return self.kind.value if self.source is None else f"{self.kind.value}:{self.source}"


DECLARED = Origin.declared()


# ---------- types ----------

@dataclass(frozen=True)
class EntityType:
    name: str
    supertype: str | None = ROOT_TYPE
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RelationshipType:
    name: str
    signatures: tuple[tuple[str, str], ...]
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.signatures:
            raise ValueError(f"relationship type '{self.name}' needs at least one signature")
        if len(set(self.signatures)) != len(self.signatures):
            raise ValueError(f"relationship type '{self.name}' has duplicate signatures")


@dataclass(frozen=True)
class TypeTable:
    entity_types: dict[str, EntityType] = field(default_factory=lambda: {ROOT_TYPE: EntityType(ROOT_TYPE, None)})
    relationship_types: dict[str, RelationshipType] = field(default_factory=dict)

    def has_type(self, name: str) -> bool:
        return name in self.entity_types

    def ancestors(self, name: str) -> list[str]:
        """`name` and all its supertypes, nearest first."""
        if name not in self.entity_types:
            raise UnknownType(name)
        chain = []
        current: str | None = name
        while current is not None:
            chain.append(current)
            current = self.entity_types[current].supertype
        return chain

    def with_entity_type(self, et: EntityType) -> "TypeTable":
        # the supertype must already exist, so the table stays a tree
        existing = self.entity_types.get(et.name)
        if existing is not None:
            if existing.supertype == et.supertype:
                return self
            raise ConflictingDeclaration(et.name, et.span, existing.span)
        if et.name in self.relationship_types:
            raise ConflictingDeclaration(et.name, et.span, self.relationship_types[et.name].span)
        if et.supertype not in self.entity_types:
            raise UnknownType(et.supertype, et.span)
        return replace(self, entity_types={**self.entity_types, et.name: et})

    def with_relationship_type(self, rt: RelationshipType) -> "TypeTable":
        for left, right in rt.signatures:
            for name in (left, right):
                if name not in self.entity_types:
                    raise UnknownType(name, rt.span)
        if rt.name in self.entity_types:
            raise ConflictingDeclaration(rt.name, rt.span, self.entity_types[rt.name].span)
        existing = self.relationship_types.get(rt.name)
        if existing is not None:
            added = tuple(s for s in rt.signatures if s not in existing.signatures)
            if not added:
                return self
            rt = replace(existing, signatures=existing.signatures + added)
        return replace(self, relationship_types={**self.relationship_types, rt.name: rt})


def subtype_of(table: TypeTable, a: str, b: str) -> bool:
    """Reflexive-transitive subtype test."""
    if b not in table.entity_types:
        raise UnknownType(b)
    return b in table.ancestors(a)


# ---------- elements ----------

@dataclass(frozen=True)
class Entity:
    name: str
    type: str
    many: bool = False
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def cardinality(self) -> str:
        return "many" if self.many else "one"

    @property
    def key(self) -> tuple:
        return (self.name,)


@dataclass(frozen=True)
class FuncDecl:
    name: str
    domain: str
    range: str
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.name,)


@dataclass(frozen=True)
class RelStmt:
    subject: str
    predicate: str
    object: str
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.subject, self.predicate, self.object)

    def __str__(self):
        return f"{self.subject} {self.predicate} {self.object}"


@dataclass(frozen=True)
class FuncApp:
    function: str
    input: str
    output: str
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.function, self.input, self.output)

    def __str__(self):
        return f"{self.function}({self.input}) |-> {self.output}"


@dataclass(frozen=True)
class Binding:
    subject: str
    uri: str
    origin: Origin = field(default=DECLARED, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.uri:
            raise ValueError(f"empty binding for '{self.subject}'")

    @property
    def slot(self) -> str:
        return "marker" if self.uri.startswith(MARKER_SCHEME + ":") else "locator"

    @property
    def key(self) -> tuple:
        return (self.subject, self.uri)


Element = Union[Entity, FuncDecl, RelStmt, FuncApp, Binding]

_KIND_ORDER = {Entity: 0, FuncDecl: 1, RelStmt: 2, FuncApp: 3, Binding: 4}


def canonical_key(element: Element) -> tuple:
    return (_KIND_ORDER[type(element)], element.key)


# ---------- megamodel ----------

@dataclass(frozen=True)
class Megamodel:
    name: str
    types: TypeTable = field(default_factory=TypeTable)
    entities: dict[str, Entity] = field(default_factory=dict)
    functions: dict[str, FuncDecl] = field(default_factory=dict)
    statements: tuple[RelStmt, ...] = ()
    applications: tuple[FuncApp, ...] = ()
    bindings: tuple[Binding, ...] = ()

    # --- queries -------------------------------------------------------------

    def entity(self, name: str) -> Entity:
        try:
            return self.entities[name]
        except KeyError:
            raise UnknownName(name) from None

    def has_name(self, name: str) -> bool:
        return name in self.entities

    def is_a(self, name: str, type_name: str) -> bool:
        ent = self.entities.get(name)
        if ent is None or not self.types.has_type(ent.type) or not self.types.has_type(type_name):
            return False
        return subtype_of(self.types, ent.type, type_name)

    def relations(self, predicate: str | None = None) -> list[RelStmt]:
        if predicate is None:
            return list(self.statements)
        return [s for s in self.statements if s.predicate == predicate]

    def bindings_of(self, name: str, slot: str | None = "locator") -> list[Binding]:
        return [b for b in self.bindings if b.subject == name and (slot is None or b.slot == slot)]

    def parts_of(self, name: str) -> list[str]:
        """Direct parts, in insertion order."""
        return [s.subject for s in self.statements if s.predicate == "partOf" and s.object == name]

    def elements(self) -> Iterator[Element]:
        yield from self.entities.values()
        yield from self.functions.values()
        yield from self.statements
        yield from self.applications
        yield from self.bindings

    def size(self) -> int:
        return len(self.entities) + len(self.functions) + len(self.statements) + len(self.applications) + len(self.bindings)

    # --- revisions -----------------------------------------------------------

    def extend(self, items: Iterable[Element], check: bool = True) -> "Megamodel":
        """
        Returns a revision with `items` added. Structural duplicates are
        skipped; an entity re-declared with a different type raises
        ConflictingDeclaration. With `check`, every referenced name must exist
        in the result (items may reference each other).
        """
        items = list(items)
        entities = dict(self.entities)
        functions = dict(self.functions)
        statements = list(self.statements)
        applications = list(self.applications)
        bindings = list(self.bindings)
        seen_statements = {s.key for s in statements}
        seen_applications = {a.key for a in applications}
        seen_bindings = {b.key for b in bindings}

        def add_entity(ent: Entity):
            existing = entities.get(ent.name)
            if existing is None:
                entities[ent.name] = ent
            elif existing != ent:
                raise ConflictingDeclaration(ent.name, ent.span, existing.span)

        for item in items:
            if isinstance(item, Entity):
                add_entity(item)
            elif isinstance(item, FuncDecl):
                existing = functions.get(item.name)
                if existing is not None and existing != item:
                    raise ConflictingDeclaration(item.name, item.span, existing.span)
                add_entity(Entity(item.name, "Function", False, item.origin, item.span))
                functions.setdefault(item.name, item)
            elif isinstance(item, RelStmt):
                if item.key not in seen_statements:
                    seen_statements.add(item.key)
                    statements.append(item)
            elif isinstance(item, FuncApp):
                if item.key not in seen_applications:
                    seen_applications.add(item.key)
                    applications.append(item)
            elif isinstance(item, Binding):
                if item.key not in seen_bindings:
                    seen_bindings.add(item.key)
                    bindings.append(item)
            else:
                raise TypeError(f"not a model element: {item!r}")

        if check:
            for item in items:
                for name in referenced_names(item):
                    if name not in entities:
                        raise UnknownName(name, getattr(item, "span", None))
                if isinstance(item, RelStmt) and item.predicate not in self.types.relationship_types:
                    raise UnknownName(item.predicate, item.span)
                if isinstance(item, Entity) and not self.types.has_type(item.type):
                    raise UnknownType(item.type, item.span)

        return replace(
            self,
            entities=entities,
            functions=functions,
            statements=tuple(statements),
            applications=tuple(applications),
            bindings=tuple(bindings),
        )


def referenced_names(item: Element) -> tuple[str, ...]:
    if isinstance(item, RelStmt):
        return (item.subject, item.object)
    if isinstance(item, FuncApp):
        return (item.function, item.input, item.output)
    if isinstance(item, FuncDecl):
        return (item.domain, item.range)
    if isinstance(item, Binding):
        return (item.subject,)
    return ()


def add_statement(model: Megamodel, stmt: Element) -> Megamodel:
    return model.extend([stmt])


def reflect(model: Megamodel) -> Megamodel:
    """Makes every entity type and relationship type available as an entity."""
    mirrored = [Entity(name, "EntityType", False, Origin.reflected(), et.span) for name, et in model.types.entity_types.items()]
    mirrored += [Entity(name, "RelationshipType", False, Origin.reflected(), rt.span) for name, rt in model.types.relationship_types.items()]
    return model.extend(mirrored, check=False)


# ---------- canonical serialization ----------

def is_prelude_element(model: Megamodel, element: Element) -> bool:
    origin = element.origin
    if origin.kind is OriginKind.IMPORTED and origin.source == "Prelude":
        return True
    if origin.kind is OriginKind.REFLECTED and isinstance(element, Entity):
        declared = model.types.entity_types.get(element.name) or model.types.relationship_types.get(element.name)
        return declared is None or (declared.origin.kind is OriginKind.IMPORTED and declared.origin.source == "Prelude") or element.name == ROOT_TYPE
    return False


def canonical_dict(model: Megamodel, include_prelude: bool = False) -> dict:
    keep = (lambda e: True) if include_prelude else (lambda e: not is_prelude_element(model, e))
    entities = []
    for ent in sorted(model.entities.values(), key=lambda e: e.name):
        if not keep(ent):
            continue
        item = {
            "name": ent.name,
            "type": ent.type,
            "cardinality": ent.cardinality,
            "origin": str(ent.origin),
            "bindings": [{"uri": b.uri, "origin": str(b.origin)} for b in sorted(model.bindings_of(ent.name, None), key=lambda b: b.uri)],
        }
        fn = model.functions.get(ent.name)
        if fn is not None:
            item["domain"], item["range"] = fn.domain, fn.range
        if ent.type == "EntityType" and ent.name in model.types.entity_types:
            item["supertype"] = model.types.entity_types[ent.name].supertype
        if ent.type == "RelationshipType" and ent.name in model.types.relationship_types:
            item["signatures"] = [list(s) for s in model.types.relationship_types[ent.name].signatures]
        entities.append(item)

    statements = [
        {"kind": "relationship", "subject": s.subject, "predicate": s.predicate, "object": s.object, "origin": str(s.origin)}
        for s in model.statements
        if keep(s)
    ]
    statements += [
        {"kind": "application", "subject": a.input, "predicate": a.function, "object": a.output, "origin": str(a.origin)}
        for a in model.applications
        if keep(a)
    ]
    statements.sort(key=lambda s: (s["kind"], s["subject"], s["predicate"], s["object"]))
    return {"entities": entities, "statements": statements}
