"""
Workspace configuration (`megal.config.json`) and process settings.

Process settings are read once from the environment (a `.env` file is
honoured); the workspace file describes aliases, module and search paths,
transient capture commands and external plugins.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from ..exceptions.exception import ConfigException

load_dotenv()

log = logging.getLogger(__name__)

CONFIG_FILE = os.getenv("MEGAL_CONFIG", "megal.config.json")
MODULE_PATH = [p for p in os.getenv("MEGAL_MODULE_PATH", "").split(os.pathsep) if p]
LOG_LEVEL = os.getenv("MEGAL_LOG_LEVEL", "WARNING")
ROOT_MODULE = os.getenv("MEGAL_ROOT")
PLUGIN_TIMEOUT = float(os.getenv("MEGAL_PLUGIN_TIMEOUT", "10"))
TRANSIENT_TIMEOUT = float(os.getenv("MEGAL_TRANSIENT_TIMEOUT", "30"))

DEFAULT_MAX_ROUNDS = 100
DEFAULT_PART_DEPTH = 3


@dataclass(frozen=True)
class TransientCommand:
    cmd: tuple[str, ...]
    capture_file: str | None = None  # None captures stdout
    timeout: float = TRANSIENT_TIMEOUT


@dataclass(frozen=True)
class PluginCommand:
    cmd: tuple[str, ...]
    timeout: float = PLUGIN_TIMEOUT


@dataclass
class WorkspaceConfig:
    root: Path
    aliases: dict[str, Path] = field(default_factory=dict)
    module_paths: list[Path] = field(default_factory=list)
    search_paths: list[Path] = field(default_factory=list)
    transients: dict[str, TransientCommand] = field(default_factory=dict)
    plugins: dict[str, PluginCommand] = field(default_factory=dict)
    knowledge_map: Path | None = None
    max_rounds: int = DEFAULT_MAX_ROUNDS
    part_depth: int = DEFAULT_PART_DEPTH


def _argv(value, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not value or not all(isinstance(a, str) for a in value):
        raise ConfigException(f"{where}: 'cmd' must be a non-empty array of strings")
    return tuple(value)


def _timeout(value, default: float, where: str) -> float:
    if value is None:
        return default
    if not isinstance(value, (int, float)) or value <= 0:
        raise ConfigException(f"{where}: 'timeoutSec' must be a positive number")
    return float(value)


def parse_config(data: dict, root: Path) -> WorkspaceConfig:
    if not isinstance(data, dict):
        raise ConfigException("config must be a JSON object")

    def path(p) -> Path:
        if not isinstance(p, str):
            raise ConfigException(f"expected a path string, got {p!r}")
        return (root / p).resolve()

    transients = {}
    for name, spec in (data.get("transients") or {}).items():
        where = f"transients.{name}"
        if not isinstance(spec, dict):
            raise ConfigException(f"{where}: expected an object")
        capture = spec.get("capture", "stdout")
        if capture == "stdout":
            capture_file = None
        elif isinstance(capture, dict) and isinstance(capture.get("file"), str):
            capture_file = capture["file"]
        else:
            raise ConfigException(f"{where}: 'capture' must be \"stdout\" or {{\"file\": path}}")
        transients[name] = TransientCommand(_argv(spec.get("cmd"), where), capture_file, _timeout(spec.get("timeoutSec"), TRANSIENT_TIMEOUT, where))

    plugins = {}
    for name, spec in (data.get("plugins") or {}).items():
        where = f"plugins.{name}"
        if not isinstance(spec, dict):
            raise ConfigException(f"{where}: expected an object")
        plugins[name] = PluginCommand(_argv(spec.get("cmd"), where), _timeout(spec.get("timeoutSec"), PLUGIN_TIMEOUT, where))

    inference = data.get("inference") or {}
    max_rounds = inference.get("maxRounds", DEFAULT_MAX_ROUNDS)
    part_depth = inference.get("partDepth", DEFAULT_PART_DEPTH)
    if not isinstance(max_rounds, int) or max_rounds < 1:
        raise ConfigException("inference.maxRounds must be an integer >= 1")
    if not isinstance(part_depth, int) or part_depth < 0:
        raise ConfigException("inference.partDepth must be an integer >= 0")

    knowledge_map = data.get("knowledgeMap")
    return WorkspaceConfig(
        root=root,
        aliases={scheme: path(p) for scheme, p in (data.get("aliases") or {}).items()},
        module_paths=[path(p) for p in data.get("modulePaths") or []],
        search_paths=[path(p) for p in data.get("searchPaths") or []],
        transients=transients,
        plugins=plugins,
        knowledge_map=path(knowledge_map) if knowledge_map else None,
        max_rounds=max_rounds,
        part_depth=part_depth,
    )


def load_config(config_file: str | Path | None = None) -> WorkspaceConfig:
    """
    Reads the workspace config. Without an explicit file, `MEGAL_CONFIG`
    (default ./megal.config.json) is used if present, else an empty config
    rooted at the current directory.
    """
    explicit = config_file is not None
    path = Path(config_file if explicit else CONFIG_FILE)
    if not path.is_file():
        if explicit:
            raise ConfigException(f"config file not found: {path}")
        log.debug("no config at %s, using defaults", path)
        return WorkspaceConfig(root=Path.cwd().resolve())
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigException(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_config(data, path.resolve().parent)
