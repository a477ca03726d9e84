"""
External analyses: one process per request, one JSON line in, one JSON line out.
"""

from __future__ import annotations

import base64
import json
import logging
import subprocess

from ..exceptions.exception import PluginTimeout, ProtocolError
from .config import PluginCommand
from .evaluation import EvalContext, EvalReport, Evaluator, Link, Message, Status
from .megamodel import RelStmt

log = logging.getLogger(__name__)

_SEVERITIES = ("error", "warning", "info")


def call_external_plugin(spec: PluginCommand, request: dict) -> dict:
    line = json.dumps(request, sort_keys=True) + "\n"
    try:
        proc = subprocess.run(list(spec.cmd), input=line.encode("utf-8"), capture_output=True, timeout=spec.timeout)
    except subprocess.TimeoutExpired:
        raise PluginTimeout(f"plugin timed out after {spec.timeout:g}s") from None
    except OSError as exc:
        raise ProtocolError(f"plugin could not start: {exc}") from exc
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", errors="replace").strip()[:400]
        raise ProtocolError(f"plugin exited with {proc.returncode}: {stderr}")

    text = proc.stdout.decode("utf-8", errors="replace")
    first = next((l for l in text.splitlines() if l.strip()), None)
    if first is None:
        raise ProtocolError("plugin wrote no response")
    try:
        response = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed response: {exc.msg}") from None
    if not isinstance(response, dict):
        raise ProtocolError("response is not a JSON object")
    return response


def _messages(raw) -> tuple[list[Message], list[Link]]:
    if not isinstance(raw, list):
        raise ProtocolError("'messages' must be an array")
    messages, links = [], []
    for m in raw:
        if not isinstance(m, dict):
            raise ProtocolError("message entries must be objects")
        if m.get("kind") == "link":
            if not isinstance(m.get("left"), str) or not isinstance(m.get("right"), str):
                raise ProtocolError("link messages need string 'left' and 'right'")
            links.append(Link(m["left"], m["right"]))
            continue
        severity = m.get("severity", "error")
        if severity not in _SEVERITIES or not isinstance(m.get("text"), str):
            raise ProtocolError("messages need a severity and a text")
        fragment = m.get("fragment")
        messages.append(Message(severity, m["text"], fragment if isinstance(fragment, str) else None))
    return messages, links


class ExternalEvaluator(Evaluator):
    def __init__(self, name: str, spec: PluginCommand):
        self.name = name
        self.spec = spec

    def _request(self, kind: str, rel: RelStmt, ctx: EvalContext) -> dict:
        artifacts = {}
        for operand in dict.fromkeys((rel.subject, rel.object)):
            entry = {"uri": ctx.uri(operand)}
            obj = ctx.single(operand)
            data = obj.content() if obj is not None else None
            if data is not None:
                entry["contentBase64"] = base64.b64encode(data).decode("ascii")
            artifacts[operand] = entry
        return {
            "kind": kind,
            "relationship": {"subject": rel.subject, "predicate": rel.predicate, "object": rel.object},
            "artifacts": artifacts,
        }

    def applies_to(self, rel, ctx):
        response = call_external_plugin(self.spec, self._request("applicable", rel, ctx))
        if not isinstance(response.get("applicable"), bool):
            raise ProtocolError("expected {\"applicable\": bool}")
        return response["applicable"]

    def evaluate(self, rel, ctx):
        response = call_external_plugin(self.spec, self._request("evaluate", rel, ctx))
        status = response.get("status")
        if status not in ("satisfied", "violated"):
            raise ProtocolError("expected status 'satisfied' or 'violated'")
        messages, links = _messages(response.get("messages", []))
        if status == "violated":
            if not messages:
                messages = [Message("error", f"vetoed by plugin '{self.name}'")]
            return EvalReport(Status.VIOLATED, messages, links)
        log.debug("plugin %s satisfied %s", self.name, rel)
        return EvalReport(Status.SATISFIED, messages, links)
