from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from lxml import etree

XML_EXTENSIONS = {".xml", ".xsd", ".xmi", ".ecore", ".genmodel", ".xsl", ".xslt"}
ARCHIVE_EXTENSIONS = {".zip", ".jar"}


class Kind(str, Enum):
    WORKSPACE = "workspace"
    DIRECTORY = "directory"
    FILE = "file"
    ARCHIVE = "archive"
    XML_DOCUMENT = "xml-document"
    XML_ELEMENT = "xml-element"
    BYTES = "bytes"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class ArchiveNode:
    """A zip archive (path or in-memory bytes) seen from `prefix` downwards."""

    source: Path | bytes
    prefix: str = ""


@dataclass(frozen=True)
class SearchRoots:
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class TransientRoot:
    names: tuple[str, ...]


@dataclass(frozen=True)
class ResourceObject:
    """
    A navigable resource. Identity is the canonical segment path from the
    workspace root (the first segment carries the scheme, if any); two
    objects are equal iff their identities are.
    """

    kind: Kind
    identity: tuple[str, ...]
    payload: Any = field(default=None, compare=False, hash=False, repr=False)

    @property
    def path(self) -> str:
        return "/".join(self.identity)

    @property
    def resolved_path(self) -> Path | None:
        """Filesystem location when the object is a plain file or directory."""
        if isinstance(self.payload, Path):
            return self.payload
        if isinstance(self.payload, ArchiveNode) and isinstance(self.payload.source, Path) and not self.payload.prefix:
            return self.payload.source
        return None

    def content(self) -> bytes | None:
        if self.kind in (Kind.FILE, Kind.XML_DOCUMENT, Kind.ARCHIVE) and isinstance(self.payload, Path):
            return self.payload.read_bytes()
        if isinstance(self.payload, bytes):
            return self.payload
        if self.kind is Kind.XML_ELEMENT:
            return etree.tostring(self.payload)
        return None

    @property
    def label(self) -> str:
        return self.identity[-1] if self.identity else ""


def file_object(path: Path, identity: tuple[str, ...]) -> ResourceObject:
    if path.is_dir():
        return ResourceObject(Kind.DIRECTORY, identity, path)
    suffix = path.suffix.lower()
    if suffix in ARCHIVE_EXTENSIONS:
        return ResourceObject(Kind.ARCHIVE, identity, ArchiveNode(path))
    if suffix in XML_EXTENSIONS:
        return ResourceObject(Kind.XML_DOCUMENT, identity, path)
    return ResourceObject(Kind.FILE, identity, path)


# --- xml utils ---

_PARSER = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=False)


def parse_xml(data: bytes):
    """Root element of `data`; raises etree.XMLSyntaxError when not well-formed."""
    return etree.fromstring(data, _PARSER)


def try_parse_xml(data: bytes | None):
    if not data or not data.strip():
        return None
    try:
        return parse_xml(data)
    except etree.XMLSyntaxError:
        return None


def qualified_name(element) -> str:
    local = etree.QName(element).localname
    return f"{element.prefix}:{local}" if element.prefix else local


def child_elements(element) -> list:
    # comments and processing instructions carry a non-string tag
    return [c for c in element if isinstance(c.tag, str)]
