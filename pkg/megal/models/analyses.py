"""
Built-in analyses: XML well-formedness, mini-schema conformance, regex
languages and name-based correspondence.
"""

from __future__ import annotations

import re
from collections import defaultdict
from functools import lru_cache

from lxml import etree

from .evaluation import EvalContext, EvalReport, Evaluator, Link, Message
from .megamodel import MARKER_SCHEME
from .resolver import Kind, ResourceObject
from .resolver.objects import child_elements, parse_xml

XML_MARKER = f"{MARKER_SCHEME}:xml"
REGEX_MARKER = f"{MARKER_SCHEME}:regex:"

# implementations that only group their children
COMPOSITES = {"composite", "ConformsToEvaluator", "ElementOfEvaluator", "CorrespondsToEvaluator"}

_CONTENT_KINDS = (Kind.FILE, Kind.BYTES, Kind.XML_DOCUMENT, Kind.TRANSIENT)


def _contents(objs: list[ResourceObject]) -> list[tuple[ResourceObject, bytes]]:
    return [(o, o.content()) for o in objs if o.kind in _CONTENT_KINDS]


def _is_blank(data: bytes | None) -> bool:
    return not data or not data.strip()


class XmlWellformed(Evaluator):
    name = "xmlWellformed"

    def applies_to(self, rel, ctx):
        if rel.predicate != "elementOf" or XML_MARKER not in ctx.markers(rel.object):
            return False
        objs = ctx.objects(rel.subject)
        return bool(objs) and all(o.kind in _CONTENT_KINDS for o in objs)

    def evaluate(self, rel, ctx):
        problems = []
        for obj, data in _contents(ctx.objects(rel.subject)):
            try:
                parse_xml(data or b"")
            except etree.XMLSyntaxError as exc:
                line, col = exc.position
                problems.append(Message("error", f"not well-formed XML at {line}:{col}: {exc.msg}", obj.path))
        return EvalReport.violated(problems) if problems else EvalReport.satisfied()


class RegexLanguage(Evaluator):
    """`L = "builtin-lang:regex:<pattern>"`: members match the pattern in full (one trailing newline ignored)."""

    name = "regexLanguage"

    def _patterns(self, rel, ctx) -> list[str]:
        return [m[len(REGEX_MARKER):] for m in ctx.markers(rel.object) if m.startswith(REGEX_MARKER)]

    def applies_to(self, rel, ctx):
        if rel.predicate != "elementOf" or not self._patterns(rel, ctx):
            return False
        objs = ctx.objects(rel.subject)
        return bool(objs) and all(o.kind in _CONTENT_KINDS for o in objs)

    def evaluate(self, rel, ctx):
        problems = []
        for pattern in self._patterns(rel, ctx):
            compiled = re.compile(pattern)
            for obj, data in _contents(ctx.objects(rel.subject)):
                text = (data or b"").decode("utf-8", errors="replace")
                text = text[:-2] if text.endswith("\r\n") else text[:-1] if text.endswith("\n") else text
                if compiled.fullmatch(text) is None:
                    problems.append(Message("error", f"content does not match /{pattern}/", obj.path))
        return EvalReport.violated(problems) if problems else EvalReport.satisfied()


# ---------- mini schema ----------

def _local(tag: str) -> str:
    return etree.QName(tag).localname


def _strip_prefix(name: str) -> str:
    return name.rsplit(":", 1)[-1]


def _nested_declarations(element) -> list[str]:
    """Names of xs:element children below `element`, not descending into those elements."""
    names = []
    for child in child_elements(element):
        if _local(child.tag) == "element":
            ref = child.get("name") or child.get("ref")
            if ref:
                names.append(_strip_prefix(ref))
        else:
            names.extend(_nested_declarations(child))
    return names


class MiniSchema:
    """
    Allowed element names and, per element name, allowed child names, read
    from xs:element and xs:complexType declarations. Namespaces are ignored.
    """

    def __init__(self, root=None):
        self.allowed: dict[str, set[str]] = defaultdict(set)
        if root is None:
            return
        types = {}
        for ct in root.iter("{*}complexType"):
            if ct.get("name"):
                types[ct.get("name")] = _nested_declarations(ct)
        for el in root.iter("{*}element"):
            name = el.get("name")
            if not name:
                continue
            self.allowed[name].update(_nested_declarations(el))
            type_name = el.get("type")
            if type_name and _strip_prefix(type_name) in types:
                self.allowed[name].update(types[_strip_prefix(type_name)])

    @classmethod
    def from_bytes(cls, data: bytes | None) -> "MiniSchema | None":
        if _is_blank(data):
            return cls()
        try:
            root = parse_xml(data)
        except etree.XMLSyntaxError:
            return None
        if _local(root.tag) != "schema":
            return None
        return cls(root)

    def violations(self, root) -> list[str]:
        out = []
        for el in root.iter():
            if not isinstance(el.tag, str):
                continue
            name = _local(el.tag)
            if name not in self.allowed:
                out.append(f"element '{name}' is not declared")
                continue
            for child in child_elements(el):
                if _local(child.tag) not in self.allowed[name]:
                    out.append(f"element '{_local(child.tag)}' is not allowed in '{name}'")
        return out


class MiniSchemaConformance(Evaluator):
    name = "miniSchemaConformance"

    def _schema(self, rel, ctx) -> MiniSchema | None:
        schema_obj = ctx.single(rel.object)
        if schema_obj is None or schema_obj.kind not in _CONTENT_KINDS:
            return None
        return MiniSchema.from_bytes(schema_obj.content())

    def applies_to(self, rel, ctx):
        if rel.predicate != "conformsTo":
            return False
        objs = ctx.objects(rel.subject)
        if not objs or any(o.kind not in _CONTENT_KINDS for o in objs):
            return False
        return self._schema(rel, ctx) is not None

    def evaluate(self, rel, ctx):
        schema = self._schema(rel, ctx)
        problems = []
        for obj, data in _contents(ctx.objects(rel.subject)):
            if _is_blank(data):
                continue
            try:
                root = parse_xml(data)
            except etree.XMLSyntaxError as exc:
                problems.append(Message("error", f"not well-formed XML: {exc.msg}", obj.path))
                continue
            problems += [Message("error", text, obj.path) for text in schema.violations(root)]
        return EvalReport.violated(problems) if problems else EvalReport.satisfied()


# ---------- correspondence ----------

def normalize_label(label: str) -> str:
    label = label.split("#", 1)[0]
    label = label.rsplit(":", 1)[-1]
    label = label.split(".", 1)[0] if not label.startswith(".") else label
    return label.casefold()


def part_label(ctx: EvalContext, name: str) -> str:
    obj = ctx.single(name)
    if obj is not None and obj.kind is Kind.XML_ELEMENT:
        return obj.payload.get("name") or etree.QName(obj.payload).localname
    if obj is not None:
        return obj.label
    uri = ctx.uri(name)
    return uri.rstrip("/").rsplit("/", 1)[-1] if uri else name


class NameCorrespondence(Evaluator):
    """
    Matches parts by normalized label, recursively inside every matched
    pair. Satisfied iff each direct part of the subject finds a partner.
    """

    name = "nameCorrespondence"

    def applies_to(self, rel, ctx):
        return rel.predicate == "correspondsTo" and bool(ctx.parts(rel.subject)) and bool(ctx.parts(rel.object))

    def _match(self, ctx, left: str, right: str, links: list[Link], infos: list[Message]) -> list[str]:
        """Links matching parts of `left` and `right`; returns the unmatched direct left parts."""
        groups_l: dict[str, list[str]] = defaultdict(list)
        groups_r: dict[str, list[str]] = defaultdict(list)
        for p in ctx.parts(left):
            groups_l[normalize_label(part_label(ctx, p))].append(p)
        for p in ctx.parts(right):
            groups_r[normalize_label(part_label(ctx, p))].append(p)

        unmatched = []
        for label, lparts in groups_l.items():
            rparts = groups_r.get(label)
            if not rparts:
                unmatched.extend(lparts)
                continue
            pairs = list(zip(lparts, rparts)) if len(lparts) == len(rparts) else [(l, r) for l in lparts for r in rparts]
            for l, r in pairs:
                links.append(Link(l, r))
                for nested in self._match(ctx, l, r, links, infos):
                    infos.append(Message("info", f"'{nested}' has no counterpart in '{r}'", ctx.uri(nested)))
        for label, rparts in groups_r.items():
            if label not in groups_l:
                infos.extend(Message("info", f"'{p}' has no counterpart in '{left}'", ctx.uri(p)) for p in rparts)
        return unmatched

    def evaluate(self, rel, ctx):
        links: list[Link] = []
        infos: list[Message] = []
        unmatched = self._match(ctx, rel.subject, rel.object, links, infos)
        if unmatched:
            errors = [Message("error", f"'{p}' has no counterpart in '{rel.object}'", ctx.uri(p)) for p in unmatched]
            return EvalReport.violated(errors + infos, links)
        return EvalReport.satisfied(infos, links)


@lru_cache(maxsize=1)
def _instances() -> dict[str, Evaluator]:
    found = [XmlWellformed(), MiniSchemaConformance(), RegexLanguage(), NameCorrespondence()]
    table = {e.name: e for e in found}
    table["XMLConformsToXSD"] = table["miniSchemaConformance"]
    table["XMLWellformed"] = table["xmlWellformed"]
    return table


def builtin_evaluators() -> dict[str, Evaluator]:
    """Implementation name -> evaluator, including the aliases used by bundled modules."""
    return dict(_instances())
