import logging
from pathlib import Path

from flask import Blueprint, Response, current_app, jsonify, request

from ..exceptions.exception import ConfigException, NoSuchStatement, UnsupportedFormat
from ..models.config import load_config
from ..models.diagnostics import has_errors
from ..models.explore import exploration_index
from ..models.export import export_graph
from ..models.pipeline import run_pipeline
from ..models.trace import format_trace_table, render_trace_table, select_trace

log = logging.getLogger(__name__)

explore_bp = Blueprint("explore", __name__)


class _NoRoot(Exception):
    pass


def _run():
    root = current_app.config.get("MEGAL_ROOT")
    if not root or not Path(root).is_file():
        raise _NoRoot(f"root module not found: {root!r} (set MEGAL_ROOT)")
    config = current_app.config.get("MEGAL_WORKSPACE") or load_config()
    return run_pipeline(root, config)


def _flag(name: str) -> bool:
    return request.args.get(name, "0").lower() in ("1", "true", "yes")


@explore_bp.errorhandler(_NoRoot)
@explore_bp.errorhandler(ConfigException)
def _server_error(exc):
    log.error("explorer cannot run: %s", exc)
    return jsonify({"error": str(exc)}), 500


@explore_bp.errorhandler(NoSuchStatement)
def _not_found(exc):
    return jsonify({"error": exc.message, "code": exc.code}), 404


@explore_bp.errorhandler(UnsupportedFormat)
def _bad_request(exc):
    return jsonify({"error": exc.message, "code": exc.code}), 400


# ---------- exploration ----------
@explore_bp.get("/explore")
def explore():
    return jsonify(exploration_index(_run()))


@explore_bp.get("/graph")
def graph():
    fmt = request.args.get("format", "json")
    if fmt not in ("dot", "json"):
        raise UnsupportedFormat(f"unsupported format '{fmt}'")
    result = _run()
    if result.model is None:
        return jsonify({"diagnostics": [d.to_dict() for d in result.diagnostics]}), 422
    text = export_graph(result.model, result.traces, fmt, _flag("includePrelude"))
    mimetype = "application/json" if fmt == "json" else "text/vnd.graphviz"
    return Response(text, mimetype=mimetype)


@explore_bp.get("/check")
def check():
    result = _run()
    counts = result.report.counts() if result.report else {}
    return jsonify({
        "ok": result.exit_code() == 0,
        "errors": has_errors(result.diagnostics),
        "summary": {status.value: n for status, n in counts.items()},
        "statements": [r.to_dict() for r in result.report.results] if result.report else [],
        "diagnostics": [d.to_dict() for d in result.diagnostics],
        "events": result.events,
    })


@explore_bp.get("/trace")
def trace():
    subject, obj = request.args.get("subject"), request.args.get("object")
    if not subject or not obj:
        return jsonify({"error": "subject and object are required"}), 400
    result = _run()
    if result.table is None:
        return jsonify({"diagnostics": [d.to_dict() for d in result.diagnostics]}), 422
    graph = select_trace(result.traces, subject, obj)
    rows = render_trace_table(graph, result.model, result.table)
    return jsonify({
        "owner": {"subject": subject, "object": obj},
        "rows": [{"depth": r.depth, "left": r.left, "right": r.right} for r in rows],
        "text": format_trace_table(rows),
    })
