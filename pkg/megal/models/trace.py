"""
Fragment-level traceability for compound `correspondsTo` statements.

Links come from the match pairs the correspondence analyses reported during
verification; each link is published as a fragment-level `correspondsTo`
statement and rendered as a left-rooted, indented two-column table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import networkx as nx

from ..exceptions.exception import NoSuchStatement
from .analyses import NameCorrespondence
from .evaluation import EvalContext, Link, VerificationReport, ordered_parts
from .megamodel import Megamodel, Origin, RelStmt
from .resolver import BindingTable

log = logging.getLogger(__name__)

TRACE_ORIGIN = Origin.inferred("trace")


@dataclass
class TraceGraph:
    owner: RelStmt
    links: list[Link] = field(default_factory=list)

    @property
    def left_root(self) -> str:
        return self.owner.subject

    @property
    def right_root(self) -> str:
        return self.owner.object

    def linked(self, left: str) -> list[str]:
        return [l.right for l in self.links if l.left == left]

    def to_dict(self, model: Megamodel) -> dict:
        def uri(name):
            b = model.bindings_of(name)
            return b[0].uri if b else None

        return {
            "owner": {"subject": self.owner.subject, "object": self.owner.object},
            "links": [
                {"left": l.left, "leftUri": uri(l.left), "right": l.right, "rightUri": uri(l.right)}
                for l in self.links
            ],
        }


@dataclass(frozen=True)
class TraceRow:
    depth: int
    left: str
    right: str

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    def format(self) -> str:
        return f"{'  ' * self.depth}{self.left}\t{self.right}"


def _part_graph(model: Megamodel) -> nx.DiGraph:
    """Edges whole -> part."""
    g = nx.DiGraph()
    g.add_edges_from((s.object, s.subject) for s in model.relations("partOf"))
    return g


def _transitive_parts(g: nx.DiGraph, name: str) -> set[str]:
    return nx.descendants(g, name) if name in g else set()


def correspondences(model: Megamodel) -> list[RelStmt]:
    """correspondsTo statements that own a trace (not the fragment-level ones published here)."""
    return [s for s in model.relations("correspondsTo") if s.origin != TRACE_ORIGIN]


def derive_traces(
    model: Megamodel,
    table: BindingTable,
    report: VerificationReport | None = None,
) -> tuple[Megamodel, list[TraceGraph]]:
    """
    One graph per correspondsTo statement (empty when part-free). Pairs are taken
    from `report`; without one, name correspondence is run directly.
    Links that do not connect a part of the subject with a part of the
    object are dropped.
    """
    parts = _part_graph(model)
    matcher = NameCorrespondence()
    ctx = EvalContext(model, table)
    graphs: list[TraceGraph] = []
    additions: list[RelStmt] = []

    for owner in correspondences(model):
        if report is not None:
            found = report.find(owner.subject, owner.predicate, owner.object)
            links = found.links if found else []
        elif matcher.applies_to(owner, ctx):
            links = matcher.evaluate(owner, ctx).links
        else:
            links = []

        left, right = _transitive_parts(parts, owner.subject), _transitive_parts(parts, owner.object)
        kept = [l for l in dict.fromkeys(links) if l.left in left and l.right in right]
        graphs.append(TraceGraph(owner, kept))
        additions += [RelStmt(l.left, "correspondsTo", l.right, TRACE_ORIGIN, owner.span) for l in kept]

    model = model.extend(additions)
    log.info("derived %d traces with %d links", len(graphs), len(additions))
    return model, graphs


def select_trace(graphs: list[TraceGraph], subject: str, obj: str) -> TraceGraph:
    for g in graphs:
        if g.owner.subject == subject and g.owner.object == obj:
            return g
    raise NoSuchStatement(f"no correspondsTo statement '{subject} correspondsTo {obj}'")


def is_bipartite_trace(model: Megamodel, graph: TraceGraph) -> bool:
    parts = _part_graph(model)
    left, right = _transitive_parts(parts, graph.left_root), _transitive_parts(parts, graph.right_root)
    return all(l.left in left and l.right in right for l in graph.links)


def render_trace_table(graph: TraceGraph, model: Megamodel, table: BindingTable) -> list[TraceRow]:
    """
    Root row first, then the parts of the left root depth-first in document
    order. The left cell is the fragment URI relative to the root's binding;
    the right cell lists the linked fragments' URIs.
    """

    def uri(name: str) -> str:
        b = model.bindings_of(name)
        return b[0].uri if b else name

    root_uri = uri(graph.left_root)
    rows = [TraceRow(0, graph.left_root, graph.right_root)]
    seen = {graph.left_root}

    def walk(name: str, depth: int):
        for part in ordered_parts(model, table, name):
            if part in seen:
                continue
            seen.add(part)
            part_uri = uri(part)
            left = part_uri[len(root_uri):] if part_uri.startswith(root_uri) and part_uri != root_uri else part_uri
            right = ", ".join(uri(r) for r in graph.linked(part))
            rows.append(TraceRow(depth, left, right))
            walk(part, depth + 1)

    walk(graph.left_root, 1)
    return rows


def format_trace_table(rows: list[TraceRow]) -> str:
    return "".join(row.format() + "\n" for row in rows)
