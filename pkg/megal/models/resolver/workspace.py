from __future__ import annotations

import logging
import subprocess
import threading
from pathlib import Path

from ...exceptions.exception import CaptureFileMissing, CaptureTimeout, CommandFailed, NoProviderAccepts, TransientException
from ..config import TransientCommand, WorkspaceConfig
from .objects import Kind, ResourceObject, SearchRoots, TransientRoot
from .providers import Provider, default_providers

log = logging.getLogger(__name__)

SEARCH_SCHEME = "classpath"
TRANSIENT_SCHEME = "transient"
_STDERR_EXCERPT = 400


class Workspace:
    """
    Root directory plus everything the config says about reaching artifacts.
    Aliases and transient commands only ever come from the config.
    """

    def __init__(
        self,
        root: str | Path,
        *,
        aliases: dict[str, Path] | None = None,
        search_paths=(),
        transients: dict[str, TransientCommand] | None = None,
        providers: list[Provider] | None = None,
    ):
        self.root = Path(root).resolve()
        self.aliases = {k: Path(v) for k, v in (aliases or {}).items()}
        self.search_paths = tuple(Path(p) for p in search_paths)
        self.transients = dict(transients or {})
        self.providers = providers if providers is not None else default_providers(self)
        self.events: list[str] = []
        self._captures: dict[str, ResourceObject | TransientException] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_config(cls, config: WorkspaceConfig) -> "Workspace":
        return cls(config.root, aliases=config.aliases, search_paths=config.search_paths, transients=config.transients)

    def root_object(self, scheme: str | None = None) -> ResourceObject:
        if scheme is None:
            return ResourceObject(Kind.WORKSPACE, (), self.root)
        if scheme in self.aliases:
            return ResourceObject(Kind.WORKSPACE, (f"{scheme}:",), self.aliases[scheme])
        if scheme == SEARCH_SCHEME:
            return ResourceObject(Kind.WORKSPACE, (f"{scheme}:",), SearchRoots(self.search_paths))
        if scheme == TRANSIENT_SCHEME:
            return ResourceObject(Kind.WORKSPACE, (f"{scheme}:",), TransientRoot(tuple(sorted(self.transients))))
        raise NoProviderAccepts(f"no provider for scheme '{scheme}:'")

    # ---------- transients ----------

    def capture_transient(self, name: str) -> ResourceObject:
        """
        Runs the configured command once per workspace; later calls return
        the same captured object (or re-raise the same failure).
        """
        with self._lock:
            cached = self._captures.get(name)
            if isinstance(cached, ResourceObject):
                return cached
            if isinstance(cached, TransientException):
                raise cached
            try:
                obj = self._run_capture(name)
            except TransientException as exc:
                self._captures[name] = exc
                raise
            self._captures[name] = obj
            self.events.append(f"capture:{name}")
            return obj

    def captured(self) -> list[str]:
        return [n for n, v in self._captures.items() if isinstance(v, ResourceObject)]

    def _run_capture(self, name: str) -> ResourceObject:
        spec = self.transients.get(name)
        if spec is None:
            raise CommandFailed(f"no transient command '{name}' configured")
        log.info("capturing transient %s: %s", name, " ".join(spec.cmd))
        try:
            proc = subprocess.run(list(spec.cmd), cwd=self.root, capture_output=True, timeout=spec.timeout)
        except subprocess.TimeoutExpired:
            raise CaptureTimeout(f"transient '{name}' timed out after {spec.timeout:g}s") from None
        except OSError as exc:
            raise CommandFailed(f"transient '{name}' could not start: {exc}") from exc
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", errors="replace")[:_STDERR_EXCERPT]
            raise CommandFailed(f"transient '{name}' exited with {proc.returncode}: {stderr.strip()}", proc.returncode, stderr)

        if spec.capture_file is None:
            data = proc.stdout
        else:
            target = self.root / spec.capture_file
            if not target.is_file():
                raise CaptureFileMissing(f"transient '{name}' did not produce {spec.capture_file}")
            data = target.read_bytes()
        return ResourceObject(Kind.TRANSIENT, (f"{TRANSIENT_SCHEME}:", name), data)
