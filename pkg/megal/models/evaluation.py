"""
Verification of relationship statements and function applications against
resolved artifacts.

The registry is read from the model itself: `T evaluatedBy P` makes plugin
P the root analysis for type T, `Q partOf P` hangs Q below P, and P's
binding picks the implementation.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import networkx as nx

from ..exceptions.exception import EvaluatorFault, MegalException
from .diagnostics import Diagnostic, SourceSpan, warning
from .megamodel import FuncApp, Megamodel, OriginKind, RelStmt
from .resolver import BindingTable, Kind, ResourceObject
from .resolver.uri import split_scheme

log = logging.getLogger(__name__)

BUILTIN_SCHEMES = ("builtin", "classpath")
EXTERNAL_SCHEME = "exec"


class Status(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    NOT_EVALUATED = "NotEvaluated"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class Message:
    severity: str
    text: str
    fragment: str | None = None

    def to_dict(self) -> dict:
        out = {"severity": self.severity, "text": self.text}
        if self.fragment is not None:
            out["fragment"] = self.fragment
        return out


@dataclass(frozen=True)
class Link:
    """A fragment-level match: entity names of the left and right fragment."""

    left: str
    right: str


@dataclass
class EvalReport:
    status: Status
    messages: list[Message] = field(default_factory=list)
    links: list[Link] = field(default_factory=list)

    def __post_init__(self):
        if self.status not in (Status.SATISFIED, Status.VIOLATED):
            raise ValueError("an evaluator reports Satisfied or Violated")
        if self.status is Status.VIOLATED and not self.messages:
            raise ValueError("a Violated report needs at least one message")

    @classmethod
    def satisfied(cls, messages=(), links=()) -> "EvalReport":
        return cls(Status.SATISFIED, list(messages), list(links))

    @classmethod
    def violated(cls, messages, links=()) -> "EvalReport":
        return cls(Status.VIOLATED, list(messages), list(links))


@dataclass
class EvalContext:
    """Read-only view on the model and the resolved operands of one run."""

    model: Megamodel
    table: BindingTable

    def objects(self, name: str) -> list[ResourceObject]:
        return self.table.get(name)

    def single(self, name: str) -> ResourceObject | None:
        return self.table.single(name)

    def uri(self, name: str) -> str | None:
        bindings = self.model.bindings_of(name)
        return bindings[0].uri if bindings else None

    def parts(self, name: str) -> list[str]:
        return ordered_parts(self.model, self.table, name)

    def markers(self, language: str) -> list[str]:
        """Marker URIs of `language` and of every language it is a subset of."""
        lattice = nx.DiGraph()
        lattice.add_node(language)
        lattice.add_edges_from((s.subject, s.object) for s in self.model.relations("subsetOf"))
        reach = [language] + sorted(nx.descendants(lattice, language))
        return [b.uri for name in reach for b in self.model.bindings_of(name, "marker")]


def ordered_parts(model: Megamodel, table: BindingTable, name: str) -> list[str]:
    """Direct parts of `name` in document order (elements) or name order (entries)."""

    def key(part: str):
        obj = table.single(part)
        if obj is not None and obj.kind is Kind.XML_ELEMENT:
            parent = obj.payload.getparent()
            return (0, parent.index(obj.payload) if parent is not None else 0, part)
        return (1, 0, obj.label if obj is not None else part)

    return sorted(dict.fromkeys(model.parts_of(name)), key=key)


class Evaluator(ABC):
    name = "evaluator"

    @abstractmethod
    def applies_to(self, rel: RelStmt, ctx: EvalContext) -> bool: ...

    @abstractmethod
    def evaluate(self, rel: RelStmt, ctx: EvalContext) -> EvalReport: ...


# ---------- registry ----------

@dataclass
class PluginNode:
    """A plugin entity; `evaluator` is None for composites, inference plugins and unknown implementations."""

    name: str
    implementation: str
    evaluator: Evaluator | None = None
    children: list["PluginNode"] = field(default_factory=list)

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class Registry:
    roots: dict[str, list[PluginNode]] = field(default_factory=dict)

    def evaluators_for(self, type_name: str) -> list[Evaluator]:
        """Depth-first over every root registered for `type_name`."""
        out: list[Evaluator] = []
        for root in self.roots.get(type_name, []):
            out.extend(node.evaluator for node in root.walk() if node.evaluator is not None)
        return out

    def to_dict(self) -> dict:
        def node(n: PluginNode) -> dict:
            return {"plugin": n.name, "implementation": n.implementation, "children": [node(c) for c in n.children]}

        return {t: [node(r) for r in roots] for t, roots in sorted(self.roots.items())}


def _implementation(model: Megamodel, plugin: str, plugins_config: dict, span: SourceSpan | None, diagnostics: list[Diagnostic]):
    from .analyses import COMPOSITES, builtin_evaluators
    from .external import ExternalEvaluator
    from .inference import INFERRERS

    bindings = model.bindings_of(plugin)
    if not bindings:
        return "builtin:composite", None
    uri = bindings[0].uri
    scheme, rest = split_scheme(uri)
    if scheme in BUILTIN_SCHEMES:
        builtins = builtin_evaluators()
        if rest in builtins:
            return uri, builtins[rest]
        if rest in COMPOSITES or rest in INFERRERS:
            return uri, None
    elif scheme == EXTERNAL_SCHEME and rest in plugins_config:
        return uri, ExternalEvaluator(rest, plugins_config[rest])
    diagnostics.append(warning("W301", f"unknown implementation '{uri}' for plugin '{plugin}'; it is never applicable", bindings[0].span or span))
    return uri, None


def build_registry(model: Megamodel, plugins_config: dict | None = None) -> tuple[Registry, list[Diagnostic]]:
    plugins_config = plugins_config or {}
    diagnostics: list[Diagnostic] = []
    children: dict[str, list[str]] = {}
    for s in model.relations("partOf"):
        if model.is_a(s.subject, "Plugin") and model.is_a(s.object, "Plugin"):
            children.setdefault(s.object, []).append(s.subject)

    nodes: dict[str, PluginNode] = {}

    def node(name: str, span, trail: tuple[str, ...]) -> PluginNode:
        if name in nodes:
            return nodes[name]
        impl, evaluator = _implementation(model, name, plugins_config, span, diagnostics)
        built = PluginNode(name, impl, evaluator)
        nodes[name] = built
        built.children = [node(c, span, trail + (name,)) for c in children.get(name, []) if c not in trail + (name,)]
        return built

    registry = Registry()
    for s in model.relations("evaluatedBy"):
        if not model.is_a(s.object, "Plugin"):
            continue
        root = node(s.object, s.span, ())
        registry.roots.setdefault(s.subject, [])
        if root not in registry.roots[s.subject]:
            registry.roots[s.subject].append(root)
    log.info("registry: %d roots over %d plugins", sum(len(r) for r in registry.roots.values()), len(nodes))
    return registry, diagnostics


# ---------- verification ----------

@dataclass
class StatementResult:
    statement: RelStmt | FuncApp
    status: Status
    messages: list[Message] = field(default_factory=list)
    links: list[Link] = field(default_factory=list)

    @property
    def triple(self) -> tuple[str, str, str]:
        return as_relationship(self.statement).key

    @property
    def span(self) -> SourceSpan | None:
        return self.statement.span

    def to_dict(self) -> dict:
        subject, predicate, obj = self.triple
        return {
            "subject": subject,
            "predicate": predicate,
            "object": obj,
            "kind": "application" if isinstance(self.statement, FuncApp) else "relationship",
            "status": self.status.value,
            "messages": [m.to_dict() for m in self.messages],
            "span": self.span.to_dict() if self.span else None,
        }


@dataclass
class VerificationReport:
    results: list[StatementResult] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def counts(self) -> dict[Status, int]:
        found = Counter(r.status for r in self.results)
        return {s: found.get(s, 0) for s in Status}

    def find(self, subject: str, predicate: str, obj: str) -> StatementResult | None:
        return next((r for r in self.results if r.triple == (subject, predicate, obj)), None)

    def status_of(self, subject: str, predicate: str, obj: str) -> Status | None:
        found = self.find(subject, predicate, obj)
        return found.status if found else None


def as_relationship(stmt: RelStmt | FuncApp) -> RelStmt:
    """`f(x) |-> y` is evaluated as the relationship `x f y`."""
    if isinstance(stmt, FuncApp):
        return RelStmt(stmt.input, stmt.function, stmt.output, stmt.origin, stmt.span)
    return stmt


def _verify_one(stmt, registry: Registry, ctx: EvalContext, diagnostics: list[Diagnostic]) -> StatementResult:
    rel = as_relationship(stmt)
    if any(ctx.table.is_unresolved(n) for n in (rel.subject, rel.object)):
        return StatementResult(stmt, Status.UNRESOLVED)

    reports: list[EvalReport] = []
    faulted = False
    for evaluator in registry.evaluators_for(rel.predicate):
        try:
            if not evaluator.applies_to(rel, ctx):
                continue
            reports.append(evaluator.evaluate(rel, ctx))
        except MegalException as exc:
            faulted = True
            diagnostics.append(Diagnostic(exc.code, "warning", f"{evaluator.name} on '{rel}': {exc.message}", rel.span))
        except Exception as exc:  # evaluator code may fail in any way
            faulted = True
            fault = EvaluatorFault(f"evaluator '{evaluator.name}' failed on '{rel}': {exc}", rel.span)
            log.warning(fault.message)
            diagnostics.append(fault.to_diagnostic())

    messages = [m for r in reports for m in r.messages]
    links = [l for r in reports for l in r.links]
    if any(r.status is Status.VIOLATED for r in reports):
        return StatementResult(stmt, Status.VIOLATED, messages, links)
    if faulted or not reports:
        if not faulted and stmt.origin.kind is OriginKind.DECLARED:
            diagnostics.append(warning("V004", f"no applicable analysis for '{rel}'; verification is incomplete", rel.span))
        return StatementResult(stmt, Status.NOT_EVALUATED, messages, links)
    return StatementResult(stmt, Status.SATISFIED, messages, links)


def verify(model: Megamodel, table: BindingTable, registry: Registry) -> VerificationReport:
    """One result per relationship statement and function application, in model order."""
    ctx = EvalContext(model, table)
    report = VerificationReport()
    for stmt in list(model.statements) + list(model.applications):
        report.results.append(_verify_one(stmt, registry, ctx, report.diagnostics))
    counts = report.counts()
    log.info("verified %d statements: %s", len(report.results), ", ".join(f"{s.value}={n}" for s, n in counts.items()))
    return report
