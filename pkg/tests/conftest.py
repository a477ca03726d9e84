import json
import shutil
import sys
import zipfile
from pathlib import Path

import pytest

from megal.models.config import load_config
from megal.models.linker import build_graph, link, module_path_loader
from megal.models.pipeline import run_pipeline
from megal.models.resolver import Workspace
from megal.models.syntax import parse

FIXTURES = Path(__file__).parent / "fixtures"
MODULES = FIXTURES / "modules"
PLUGINS = FIXTURES / "plugins"

ARCHIVE_CONTENT = b"""<?xml version="1.0"?>
<root>
  <meta/>
  <models>
    <model id="a"/>
    <!-- skipped -->
    <model id="b"/>
    <model id="c"/>
  </models>
</root>
"""


def workspace_config(python=sys.executable, checker="satisfied") -> dict:
    return {
        "aliases": {"eclipse": "eclipse-plugins"},
        "modulePaths": ["modules"],
        "searchPaths": ["xml"],
        "transients": {
            "companySnapshot": {"cmd": [python, "tools/emit_company.py"]},
            "broken": {"cmd": [python, "tools/fail.py"]},
        },
        "plugins": {
            "checker": {"cmd": [python, str(PLUGINS / "constant.py"), checker]},
        },
    }


@pytest.fixture
def workspace(tmp_path) -> Path:
    """A private copy of the fixture workspace with its config, modules and archive."""
    ws = tmp_path / "ws"
    shutil.copytree(FIXTURES / "workspace", ws)
    shutil.copytree(MODULES, ws / "modules")
    (ws / "archives").mkdir()
    with zipfile.ZipFile(ws / "archives" / "data.zip", "w") as zf:
        zf.writestr("content.xml", ARCHIVE_CONTENT)
        zf.writestr("docs/readme.txt", b"archived\n")
    write_config(ws, workspace_config())
    return ws


def write_config(ws: Path, data: dict) -> Path:
    path = ws / "megal.config.json"
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def config(workspace):
    return load_config(workspace / "megal.config.json")


@pytest.fixture
def run(workspace, config):
    """Runs the pipeline on a root module of the fixture workspace."""

    def _run(root: str, **kwargs):
        return run_pipeline(workspace / root, config, **kwargs)

    return _run


@pytest.fixture
def ws(workspace, config) -> Workspace:
    return Workspace.from_config(config)


def corpus_loader(extra: dict[str, str] | None = None):
    """Loads modules from `extra` (name -> text) first, then the corpus, then the bundled modules."""
    fallback = module_path_loader([MODULES])
    extra = extra or {}

    def load(name):
        if name in extra:
            return parse(extra[name], f"{name}.megal")
        return fallback(name)

    return load


@pytest.fixture
def linked():
    """Parses and links module text against the corpus; returns (model, diagnostics)."""

    def _linked(text: str, extra: dict[str, str] | None = None, file_name: str = "Root.megal"):
        return link(build_graph(parse(text, file_name), corpus_loader(extra)))

    return _linked
