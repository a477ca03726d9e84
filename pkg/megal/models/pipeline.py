"""
parse -> link -> check -> resolve -> infer -> evaluate -> trace

Stages record themselves in `PipelineResult.events`; transient captures
show up as `capture:<name>` between `resolve` and `evaluate`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions.exception import FixedPointNotReached, MegalException, ParseError
from . import config as settings
from .checker import check_well_formed
from .config import WorkspaceConfig
from .diagnostics import Diagnostic, has_errors
from .evaluation import Registry, Status, VerificationReport, build_registry, verify
from .inference import EngineConfig, InferenceResult, load_knowledge_map, registered_inferrers, run_inference
from .linker import link, load_graph, module_path_loader
from .megamodel import Megamodel
from .resolver import BindingTable, Workspace, resolve_all_bindings
from .trace import TraceGraph, derive_traces

log = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    root_file: Path
    model: Megamodel | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    events: list[str] = field(default_factory=list)
    workspace: Workspace | None = None
    table: BindingTable | None = None
    inference: InferenceResult | None = None
    registry: Registry | None = None
    report: VerificationReport | None = None
    traces: list[TraceGraph] = field(default_factory=list)

    @property
    def has_errors(self) -> bool:
        return has_errors(self.diagnostics)

    def exit_code(self, strict: bool = False) -> int:
        if self.has_errors:
            return 1
        if self.report is None:
            return 0
        counts = self.report.counts()
        if counts[Status.VIOLATED]:
            return 1
        if strict and (counts[Status.NOT_EVALUATED] or counts[Status.UNRESOLVED]):
            return 1
        return 0


def module_search_path(cli_paths=(), config: WorkspaceConfig | None = None) -> list[Path]:
    """--module-path, then MEGAL_MODULE_PATH, then the config's modulePaths (bundled modules come last)."""
    paths = [Path(p) for p in cli_paths] + [Path(p) for p in settings.MODULE_PATH]
    if config is not None:
        paths += config.module_paths
    return paths


def run_pipeline(root_file, config: WorkspaceConfig, module_paths=(), *, until: str | None = None) -> PipelineResult:
    """
    Runs every stage (or up to and including `until`). Per-element problems
    become diagnostics; a parse or import failure, or any checker error,
    stops the run after that stage.
    """
    result = PipelineResult(Path(root_file))
    loader = module_path_loader(module_search_path(module_paths, config))

    def stage(name: str) -> bool:
        result.events.append(name)
        log.debug("stage %s", name)
        return until is None or name != until

    stage("parse")
    try:
        graph = load_graph(root_file, loader)
    except ParseError as exc:
        result.diagnostics += [e.to_diagnostic() for e in exc.errors]
        return result
    except MegalException as exc:
        result.diagnostics.append(exc.to_diagnostic())
        return result

    keep_going = stage("link")
    model, link_diagnostics = link(graph)
    result.model = model
    result.diagnostics += link_diagnostics
    if not keep_going:
        return result

    keep_going = stage("check")
    result.diagnostics += check_well_formed(model)
    if result.has_errors or not keep_going:
        return result

    keep_going = stage("resolve")
    result.workspace = Workspace.from_config(config)
    result.table, resolve_diagnostics = resolve_all_bindings(model, result.workspace)
    result.diagnostics += resolve_diagnostics
    _sync_captures(result)
    if not keep_going:
        return result

    keep_going = stage("infer")
    # inference plugins are registered like analyses, so the registry comes first
    result.registry, registry_diagnostics = build_registry(model, config.plugins)
    result.diagnostics += registry_diagnostics
    knowledge_map = load_knowledge_map(config.knowledge_map)
    inferrers = registered_inferrers(result.registry, model, part_depth=config.part_depth, knowledge_map=knowledge_map)
    try:
        result.inference = run_inference(model, result.table, inferrers, EngineConfig(config.max_rounds))
        model = result.model = result.inference.model
        result.diagnostics += result.inference.diagnostics
    except FixedPointNotReached as exc:
        result.diagnostics.append(exc.to_diagnostic())
    _sync_captures(result)
    if not keep_going:
        return result

    keep_going = stage("evaluate")
    result.report = verify(model, result.table, result.registry)
    result.diagnostics += result.report.diagnostics
    if not keep_going:
        return result

    stage("trace")
    result.model, result.traces = derive_traces(model, result.table, result.report)
    return result


def _sync_captures(result: PipelineResult):
    for event in result.workspace.events:
        if event not in result.events:
            result.events.append(event)
