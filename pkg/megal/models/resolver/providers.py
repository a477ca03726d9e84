"""
Artifact providers. Each provider answers three questions about an object:
can it navigate the object (`accept`), which segments are reachable from it
(`next`), and which objects a reachable segment denotes (`navigate`).
"""

from __future__ import annotations

import io
import zipfile
from abc import ABC, abstractmethod
from collections import Counter
from typing import TYPE_CHECKING

from .objects import (
    ARCHIVE_EXTENSIONS,
    XML_EXTENSIONS,
    ArchiveNode,
    Kind,
    ResourceObject,
    SearchRoots,
    TransientRoot,
    child_elements,
    file_object,
    qualified_name,
    try_parse_xml,
)

if TYPE_CHECKING:
    from .workspace import Workspace


class Provider(ABC):
    name = "provider"

    @abstractmethod
    def accept(self, x: ResourceObject) -> bool: ...

    @abstractmethod
    def next(self, x: ResourceObject) -> list[str]: ...

    @abstractmethod
    def navigate(self, x: ResourceObject, key: str) -> list[ResourceObject]: ...


class DirectoryProvider(Provider):
    name = "directory"

    def accept(self, x):
        return x.kind in (Kind.WORKSPACE, Kind.DIRECTORY) and x.resolved_path is not None and x.resolved_path.is_dir()

    def next(self, x):
        return sorted(p.name for p in x.resolved_path.iterdir())

    def navigate(self, x, key):
        if "/" in key or key in (".", ".."):
            return []
        child = x.resolved_path / key
        if not child.exists():
            return []
        return [file_object(child, x.identity + (key,))]


class ArchiveProvider(Provider):
    name = "archive"

    def accept(self, x):
        return x.kind is Kind.ARCHIVE and isinstance(x.payload, ArchiveNode)

    @staticmethod
    def _open(node: ArchiveNode) -> zipfile.ZipFile:
        source = io.BytesIO(node.source) if isinstance(node.source, bytes) else node.source
        return zipfile.ZipFile(source)

    def next(self, x):
        node: ArchiveNode = x.payload
        with self._open(node) as zf:
            names = zf.namelist()
        children = set()
        for n in names:
            if n.startswith(node.prefix) and n != node.prefix:
                first = n[len(node.prefix):].split("/", 1)[0]
                if first:
                    children.add(first)
        return sorted(children)

    def navigate(self, x, key):
        node: ArchiveNode = x.payload
        full = node.prefix + key
        identity = x.identity + (key,)
        with self._open(node) as zf:
            names = zf.namelist()
            if any(n.startswith(full + "/") for n in names):
                return [ResourceObject(Kind.ARCHIVE, identity, ArchiveNode(node.source, full + "/"))]
            if full not in names:
                return []
            data = zf.read(full)
        suffix = "." + key.rsplit(".", 1)[-1].lower() if "." in key else ""
        if suffix in ARCHIVE_EXTENSIONS:
            return [ResourceObject(Kind.ARCHIVE, identity, ArchiveNode(data))]
        if suffix in XML_EXTENSIONS:
            return [ResourceObject(Kind.XML_DOCUMENT, identity, data)]
        return [ResourceObject(Kind.BYTES, identity, data)]


class XmlProvider(Provider):
    """Document -> root element -> child elements, keyed by prefixed element name."""

    name = "xml"

    def _root(self, x: ResourceObject):
        if x.kind is Kind.XML_ELEMENT:
            return None
        if x.kind in (Kind.XML_DOCUMENT, Kind.FILE, Kind.BYTES, Kind.TRANSIENT):
            return try_parse_xml(x.content())
        return None

    def accept(self, x):
        if x.kind is Kind.XML_ELEMENT:
            return True
        return self._root(x) is not None

    def next(self, x):
        if x.kind is Kind.XML_ELEMENT:
            seen: dict[str, None] = {}
            for child in child_elements(x.payload):
                seen.setdefault(qualified_name(child))
            return list(seen)
        root = self._root(x)
        return [qualified_name(root)] if root is not None else []

    def navigate(self, x, key):
        if x.kind is not Kind.XML_ELEMENT:
            root = self._root(x)
            if root is None or qualified_name(root) != key:
                return []
            return [ResourceObject(Kind.XML_ELEMENT, x.identity + (key,), root)]
        matches = [c for c in child_elements(x.payload) if qualified_name(c) == key]
        segments = sibling_segments([key] * len(matches))
        return [ResourceObject(Kind.XML_ELEMENT, x.identity + (seg,), el) for seg, el in zip(segments, matches)]


class SearchPathProvider(Provider):
    """`classpath:` roots: the first configured directory holding the segment wins."""

    name = "search-path"

    def accept(self, x):
        return x.kind is Kind.WORKSPACE and isinstance(x.payload, SearchRoots)

    def next(self, x):
        names = set()
        for root in x.payload.paths:
            if root.is_dir():
                names.update(p.name for p in root.iterdir())
        return sorted(names)

    def navigate(self, x, key):
        for root in x.payload.paths:
            candidate = root / key
            if candidate.exists():
                return [file_object(candidate, x.identity + (key,))]
        return []


class TransientProvider(Provider):
    name = "transient"

    def __init__(self, workspace: "Workspace"):
        self.workspace = workspace

    def accept(self, x):
        return x.kind is Kind.WORKSPACE and isinstance(x.payload, TransientRoot)

    def next(self, x):
        return list(x.payload.names)

    def navigate(self, x, key):
        if key not in x.payload.names:
            return []
        return [self.workspace.capture_transient(key)]


def default_providers(workspace: "Workspace") -> list[Provider]:
    """Registration order is fixed; the first accepting provider that knows a segment wins."""
    return [DirectoryProvider(), ArchiveProvider(), XmlProvider(), SearchPathProvider(), TransientProvider(workspace)]


def sibling_segments(names: list[str]) -> list[str]:
    """Minimal segments for a list of sibling names: `name#k` only where names repeat."""
    totals = Counter(names)
    seen: Counter = Counter()
    out = []
    for n in names:
        out.append(n if totals[n] == 1 else f"{n}#{seen[n]}")
        seen[n] += 1
    return out
