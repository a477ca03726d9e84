from __future__ import annotations

import re
from dataclasses import dataclass

from ...exceptions.exception import MalformedUri

_SCHEME = re.compile(r"^([A-Za-z][A-Za-z0-9+.\-]*):(.*)$", re.DOTALL)


@dataclass(frozen=True)
class Segment:
    name: str
    index: int | None = None

    def __str__(self):
        return self.name if self.index is None else f"{self.name}#{self.index}"


@dataclass(frozen=True)
class ParsedUri:
    scheme: str | None
    segments: tuple[Segment, ...]

    def __str__(self):
        path = "/".join(str(s) for s in self.segments)
        return f"{self.scheme}:{path}" if self.scheme else path


def split_scheme(uri: str) -> tuple[str | None, str]:
    m = _SCHEME.match(uri)
    if m is None:
        return None, uri
    return m.group(1), m.group(2)


def parse_uri(uri: str) -> ParsedUri:
    """
    `scheme:seg/seg#k/...`. The scheme is optional; leading slashes are
    ignored; `#k` selects the k-th (0-based) same-named sibling.
    """
    scheme, rest = split_scheme(uri)
    rest = rest.lstrip("/")
    if not rest:
        return ParsedUri(scheme, ())
    segments = []
    for raw in rest.split("/"):
        if not raw:
            raise MalformedUri(f"empty segment in '{uri}'")
        name, sep, index = raw.rpartition("#")
        if not sep:
            segments.append(Segment(raw))
            continue
        if not name:
            raise MalformedUri(f"segment '{raw}' has no name in '{uri}'")
        if not index.isdigit():
            raise MalformedUri(f"non-numeric index '#{index}' in '{uri}'")
        segments.append(Segment(name, int(index)))
    return ParsedUri(scheme, tuple(segments))
