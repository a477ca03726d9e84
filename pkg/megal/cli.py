"""`megal` command group: check, graph, trace, explore and serve a root module."""

from __future__ import annotations

import json
import logging
import sys
from functools import wraps

import click

from .exceptions.exception import ConfigException, NoSuchStatement
from .models import config as settings
from .models.config import load_config
from .models.diagnostics import format_human
from .models.evaluation import Status
from .models.explore import exploration_json
from .models.export import FORMATS, export_graph
from .models.megamodel import canonical_dict
from .models.pipeline import PipelineResult, run_pipeline
from .models.trace import format_trace_table, render_trace_table, select_trace

log = logging.getLogger(__name__)


def _configure_logging(verbose: bool):
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def pipeline_options(fn):
    """Options shared by every command that runs the pipeline."""

    @click.argument("root", type=click.Path(exists=True, dir_okay=False))
    @click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None, help="Workspace config (default ./megal.config.json).")
    @click.option("--module-path", "module_paths", multiple=True, type=click.Path(file_okay=False), help="Extra directory searched for imported modules.")
    @click.option("--verbose", is_flag=True, help="Debug logging and the stage event log on stderr.")
    @wraps(fn)
    def wrapper(root, config_file, module_paths, verbose, **kwargs):
        _configure_logging(verbose)
        try:
            config = load_config(config_file)
        except ConfigException as exc:
            raise click.UsageError(exc.message) from None
        result = run_pipeline(root, config, module_paths)
        if verbose:
            click.echo("events: " + " ".join(result.events), err=True)
        return fn(result, **kwargs)

    return wrapper


def _fail_on_errors(result: PipelineResult):
    if result.has_errors or result.model is None:
        if result.diagnostics:
            click.echo(format_human(result.diagnostics), err=True)
        sys.exit(1)


def _summary(result: PipelineResult) -> str:
    counts = result.report.counts()
    width = max(len(s.value) for s in Status)
    lines = ["status".ljust(width) + "  count"]
    lines += [f"{s.value.ljust(width)}  {counts[s]}" for s in Status]
    violated = [r for r in result.report.results if r.status is Status.VIOLATED]
    for r in violated:
        where = str(r.span) if r.span else "<model>"
        lines.append(f"{where}: Violated {' '.join(r.triple)}")
        lines += [f"    {m.severity}: {m.text}" + (f" [{m.fragment}]" if m.fragment else "") for m in r.messages]
    return "\n".join(lines)


@click.group()
@click.version_option(version="0.1.0", prog_name="megal")
def cli():
    """Megamodels of linguistic architecture: check, trace and explore."""


# ---------- commands ----------

@cli.command()
@pipeline_options
@click.option("--format", "fmt", type=click.Choice(["human", "json"]), default="human")
@click.option("--strict", is_flag=True, help="Also fail on NotEvaluated and Unresolved statements.")
@click.option("--emit-model", type=click.Path(dir_okay=False), default=None, help="Write the final model as canonical JSON.")
def check(result: PipelineResult, fmt, strict, emit_model):
    """Run the whole pipeline and report diagnostics and statement statuses."""
    if emit_model and result.model is not None:
        with open(emit_model, "w", encoding="utf-8") as fh:
            json.dump(canonical_dict(result.model), fh, sort_keys=True, indent=2, ensure_ascii=False)
            fh.write("\n")

    if fmt == "json":
        counts = result.report.counts() if result.report else {}
        click.echo(json.dumps({
            "diagnostics": [d.to_dict() for d in result.diagnostics],
            "statements": [r.to_dict() for r in result.report.results] if result.report else [],
            "summary": {s.value: n for s, n in counts.items()},
            "exitCode": result.exit_code(strict),
        }, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        if result.diagnostics:
            click.echo(format_human(result.diagnostics))
        if result.report is not None:
            click.echo(_summary(result))
    sys.exit(result.exit_code(strict))


@cli.command()
@pipeline_options
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="dot")
@click.option("--include-prelude", is_flag=True, help="Keep prelude types and statements in the output.")
def graph(result: PipelineResult, fmt, include_prelude):
    """Export the inferred model (and its traces) as DOT or JSON."""
    _fail_on_errors(result)
    click.echo(export_graph(result.model, result.traces, fmt, include_prelude), nl=False)


@cli.command()
@pipeline_options
@click.argument("selector")
def trace(result: PipelineResult, selector):
    """Print the trace table of SELECTOR, written `subject/object`."""
    subject, sep, obj = selector.partition("/")
    if not sep or not subject or not obj:
        raise click.BadParameter("expected 'subject/object'", param_hint="SELECTOR")
    _fail_on_errors(result)
    try:
        found = select_trace(result.traces, subject, obj)
    except NoSuchStatement as exc:
        click.echo(exc.to_diagnostic().format(), err=True)
        sys.exit(1)
    click.echo(format_trace_table(render_trace_table(found, result.model, result.table)), nl=False)


@cli.command()
@pipeline_options
def explore(result: PipelineResult):
    """Print the exploration index as JSON."""
    _fail_on_errors(result)
    click.echo(exploration_json(result), nl=False)


@cli.command()
@click.argument("root", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_file", type=click.Path(dir_okay=False), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=5000, show_default=True, type=int)
@click.option("--verbose", is_flag=True)
def serve(root, config_file, host, port, verbose):
    """Serve the read-only explorer API for ROOT."""
    from . import create_app

    _configure_logging(verbose)
    try:
        config = load_config(config_file)
    except ConfigException as exc:
        raise click.UsageError(exc.message) from None
    create_app(root, config).run(host=host, port=port, debug=verbose)


def main():
    cli(prog_name="megal")
