"""
Module graph loading and linking.

Importing has copy-and-paste semantics: an import item contributes the full
expansion of the imported module (its own imports first), with the item's
renames substituted into every copied statement. Structurally equal
declarations are merged, so unrenamed declarations reached along several
paths appear once while each distinct rename yields its own copy. Bindings
of a module replace the same-slot bindings it received from its imports.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import networkx as nx

from ..exceptions.exception import (
    ConflictingDeclaration,
    ImportCycle,
    MegalException,
    ModuleNotFound,
    RenameCollision,
    RenameTargetUnknown,
    TypeCycle,
    UnknownType,
)
from .diagnostics import Diagnostic, error
from .megamodel import (
    Binding,
    Entity,
    EntityType,
    FuncApp,
    FuncDecl,
    Megamodel,
    Origin,
    RelationshipType,
    RelStmt,
    TypeTable,
    reflect,
)
from .syntax import RawModule, RawStatement, StatementKind, parse

log = logging.getLogger(__name__)

PRELUDE = "Prelude"
DATA_DIR = Path(__file__).resolve().parent.parent / "data"

Loader = Callable[[str], RawModule]

# token positions holding entity names, per statement kind
_NAME_SLOTS = {
    StatementKind.ENTITY_DECL: (0,),
    StatementKind.FUNC_DECL: (0, 1, 2),
    StatementKind.FUNC_APP: (0, 1, 2),
    StatementKind.REL_STMT: (0, 2),
    StatementKind.BINDING: (0,),
    StatementKind.ENTITY_TYPE_DECL: (),
    StatementKind.REL_TYPE_DECL: (),
}


@dataclass
class ModuleGraph:
    root: str
    nodes: dict[str, RawModule]
    edges: nx.DiGraph = field(default_factory=nx.DiGraph)


# ---------- loading ----------

def module_path_loader(paths=()) -> Loader:
    """Loads `Foo` from `<dir>/Foo.megal`, first hit wins; bundled modules come last."""
    search = [Path(p) for p in paths] + [DATA_DIR]

    def load(name: str) -> RawModule:
        for directory in search:
            candidate = directory / f"{name}.megal"
            if candidate.is_file():
                log.debug("loading module %s from %s", name, candidate)
                return parse(candidate.read_text(encoding="utf-8"), str(candidate))
        raise ModuleNotFound(name)

    return load


def load_graph(root_file, loader: Loader) -> ModuleGraph:
    root_path = Path(root_file)
    root = parse(root_path.read_text(encoding="utf-8"), str(root_path))
    return build_graph(root, loader)


def build_graph(root: RawModule, loader: Loader) -> ModuleGraph:
    graph = ModuleGraph(root.name, {root.name: root})
    graph.edges.add_node(root.name)
    queue = deque([root])
    while queue:
        module = queue.popleft()
        for item in module.imports:
            graph.edges.add_edge(module.name, item.module)
            if item.module in graph.nodes:
                continue
            try:
                imported = loader(item.module)
            except ModuleNotFound:
                raise ModuleNotFound(item.module, item.span) from None
            graph.nodes[item.module] = imported
            queue.append(imported)

    if PRELUDE not in graph.nodes:
        graph.nodes[PRELUDE] = loader(PRELUDE)
        graph.edges.add_edge(root.name, PRELUDE)

    try:
        cycle = nx.find_cycle(graph.edges, source=root.name)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        names = [u for u, _ in cycle] + [cycle[0][0]]
        raise ImportCycle(names, graph.nodes[names[0]].span)
    return graph


# ---------- renaming ----------

def _substitute(statement: RawStatement, mapping: dict[str, str]) -> RawStatement:
    tokens = list(statement.tokens)
    changed = False
    for i in _NAME_SLOTS[statement.kind]:
        new = mapping.get(tokens[i])
        if new is not None:
            tokens[i] = new
            changed = True
    return replace(statement, tokens=tuple(tokens)) if changed else statement


def _declared(statements) -> set[str]:
    return {st.tokens[0] for st in statements if st.kind in (StatementKind.ENTITY_DECL, StatementKind.FUNC_DECL)}


def _check_renames(renames, declared: set[str], module: str, span=None, taken=frozenset(), importer: str | None = None) -> dict[str, str]:
    """
    `declared` are the names of the copied module; `taken` are names the
    importer already has from its own declarations or earlier import items.
    """
    mapping: dict[str, str] = {}
    targets: set[str] = set()
    for old, new in renames:
        if old not in declared:
            raise RenameTargetUnknown(old, module, span)
        if new == old:
            continue
        if new in declared or new in targets:
            raise RenameCollision(new, module, span)
        if new in taken:
            raise RenameCollision(new, importer or module, span)
        mapping[old] = new
        targets.add(new)
    return mapping


def apply_renames(module: RawModule, renames) -> RawModule:
    """Substitutes each (old, new) pair through every statement of `module`."""
    if not renames:
        return module
    mapping = _check_renames(renames, module.declared_names(), module.name)
    return replace(module, statements=tuple(_substitute(st, mapping) for st in module.statements))


# ---------- linking ----------

@dataclass(frozen=True)
class _Item:
    statement: RawStatement
    module: str


def _expand(graph: ModuleGraph, name: str, diagnostics: list[Diagnostic]) -> list[_Item]:
    module = graph.nodes[name]
    items: list[_Item] = []
    own_names = _declared(module.statements)
    for imp in module.imports:
        copied = _expand(graph, imp.module, diagnostics)
        if imp.renames:
            taken = own_names | _declared(it.statement for it in items)
            try:
                mapping = _check_renames(
                    imp.renames, _declared(it.statement for it in copied), imp.module, imp.span, taken, name
                )
                copied = [_Item(_substitute(it.statement, mapping), it.module) for it in copied]
            except MegalException as exc:
                diagnostics.append(exc.to_diagnostic())
        items.extend(copied)

    own = [_Item(st, name) for st in module.statements]
    own_slots = {(it.statement.tokens[0], _slot(it.statement)) for it in own if it.statement.kind is StatementKind.BINDING}
    if own_slots:
        items = [
            it for it in items
            if not (it.statement.kind is StatementKind.BINDING and (it.statement.tokens[0], _slot(it.statement)) in own_slots)
        ]
    return items + own


def _slot(statement: RawStatement) -> str:
    return Binding(statement.tokens[0], statement.tokens[1]).slot


def _stuck_types(deferred: list[_Item]) -> list[Diagnostic]:
    """Declarations whose supertype never appeared: either part of a cycle or truly unknown."""
    lattice = nx.DiGraph()
    lattice.add_edges_from(tuple(it.statement.tokens) for it in deferred)
    in_cycle = {name for cycle in nx.simple_cycles(lattice) for name in cycle}
    out = []
    for it in deferred:
        name, supertype = it.statement.tokens
        if name in in_cycle:
            out.append(TypeCycle(f"type '{name}' is its own supertype via '{supertype}'", it.statement.span).to_diagnostic())
        else:
            out.append(error("E009", f"unknown supertype '{supertype}' of '{name}'", it.statement.span))
    return out


def _build_types(items: list[_Item], origin_of, diagnostics: list[Diagnostic]) -> TypeTable:
    table = TypeTable()
    pending = [it for it in items if it.statement.kind is StatementKind.ENTITY_TYPE_DECL]
    while pending:
        deferred = []
        for it in pending:
            name, supertype = it.statement.tokens
            et = EntityType(name, supertype, origin_of(it), it.statement.span)
            try:
                table = table.with_entity_type(et)
            except UnknownType:
                deferred.append(it)
            except ConflictingDeclaration as exc:
                diagnostics.append(exc.to_diagnostic())
        if len(deferred) == len(pending):
            diagnostics.extend(_stuck_types(deferred))
            break
        pending = deferred

    for it in items:
        if it.statement.kind is not StatementKind.REL_TYPE_DECL:
            continue
        name, left, right = it.statement.tokens
        try:
            table = table.with_relationship_type(RelationshipType(name, ((left, right),), origin_of(it), it.statement.span))
        except (UnknownType, ConflictingDeclaration) as exc:
            diagnostics.append(exc.to_diagnostic())
    return table


def _element(it: _Item, origin: Origin):
    st, t = it.statement, it.statement.tokens
    if st.kind is StatementKind.ENTITY_DECL:
        return Entity(t[0], t[1], bool(t[2]), origin, st.span)
    if st.kind is StatementKind.FUNC_DECL:
        return FuncDecl(t[0], t[1], t[2], origin, st.span)
    if st.kind is StatementKind.FUNC_APP:
        return FuncApp(t[0], t[1], t[2], origin, st.span)
    if st.kind is StatementKind.REL_STMT:
        return RelStmt(t[0], t[1], t[2], origin, st.span)
    if st.kind is StatementKind.BINDING:
        return Binding(t[0], t[1], origin, st.span)
    return None


def link(graph: ModuleGraph, root: str | None = None) -> tuple[Megamodel, list[Diagnostic]]:
    root = root or graph.root
    diagnostics: list[Diagnostic] = []
    items = _expand(graph, PRELUDE, diagnostics) if root != PRELUDE else []
    items += _expand(graph, root, diagnostics)

    def origin_of(it: _Item) -> Origin:
        return Origin.declared() if it.module == root else Origin.imported(it.module)

    model = reflect(Megamodel(root, _build_types(items, origin_of, diagnostics)))

    declarations = [it for it in items if it.statement.kind in (StatementKind.ENTITY_DECL, StatementKind.FUNC_DECL)]
    rest = [it for it in items if it.statement.kind in (StatementKind.REL_STMT, StatementKind.FUNC_APP, StatementKind.BINDING)]
    for it in declarations + rest:
        try:
            model = model.extend([_element(it, origin_of(it))], check=False)
        except ConflictingDeclaration as exc:
            diagnostics.append(exc.to_diagnostic())

    log.info("linked %s: %d entities, %d statements, %d bindings", root, len(model.entities), len(model.statements), len(model.bindings))
    return model, diagnostics


def link_file(root_file, module_paths=()) -> tuple[Megamodel, list[Diagnostic]]:
    graph = load_graph(root_file, module_path_loader(module_paths))
    return link(graph)
