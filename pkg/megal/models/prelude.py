from __future__ import annotations

from functools import lru_cache

from .linker import DATA_DIR, PRELUDE, build_graph, link, module_path_loader
from .megamodel import Megamodel
from .syntax import parse


@lru_cache(maxsize=1)
def prelude_module() -> Megamodel:
    """The fixed prelude vocabulary, unreflected."""
    path = DATA_DIR / f"{PRELUDE}.megal"
    raw = parse(path.read_text(encoding="utf-8"), str(path))
    model, diagnostics = link(build_graph(raw, module_path_loader()))
    if diagnostics:
        raise RuntimeError(f"bundled prelude is broken: {diagnostics[0].format()}")
    # link() always reflects; the prelude itself is handed out without mirrors
    return Megamodel(model.name, model.types)
