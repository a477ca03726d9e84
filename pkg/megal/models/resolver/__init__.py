from .bindings import BindingTable, resolvable, resolve, resolve_all_bindings
from .objects import Kind, ResourceObject
from .providers import Provider, default_providers, sibling_segments
from .uri import ParsedUri, Segment, parse_uri
from .workspace import Workspace

__all__ = [
    "BindingTable",
    "Kind",
    "ParsedUri",
    "Provider",
    "ResourceObject",
    "Segment",
    "Workspace",
    "default_providers",
    "parse_uri",
    "resolvable",
    "resolve",
    "resolve_all_bindings",
    "sibling_segments",
]
