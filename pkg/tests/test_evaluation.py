import pytest

from megal.models.analyses import MiniSchema, NameCorrespondence, normalize_label
from megal.models.evaluation import (
    EvalReport,
    Evaluator,
    Message,
    PluginNode,
    Registry,
    Status,
    build_registry,
    verify,
)
from megal.models.megamodel import OriginKind
from megal.models.resolver import resolve_all_bindings
from megal.models.resolver.objects import parse_xml

from .conftest import FIXTURES


def statuses(result):
    return {r.triple: r.status for r in result.report.results if r.statement.origin.kind is OriginKind.DECLARED}


def codes(result):
    return [d.code for d in result.diagnostics]


# ---------- end to end ----------

def test_data_binding(run):
    result = run("DataBinding.megal")
    found = statuses(result)
    assert found[("xmlFile", "elementOf", "XML")] is Status.SATISFIED
    assert found[("xsdFiles", "elementOf", "XSD")] is Status.SATISFIED
    assert found[("xmlFile", "conformsTo", "xsdFiles")] is Status.SATISFIED
    assert found[("xsdFiles", "correspondsTo", "javaFiles")] is Status.SATISFIED
    assert found[("javaFiles", "elementOf", "Java")] is Status.NOT_EVALUATED
    assert result.exit_code() == 0
    assert result.exit_code(strict=True) == 1


def test_missing_analysis_is_reported_for_declared_statements_only(run):
    result = run("DataBinding.megal")
    flagged = [d.message for d in result.diagnostics if d.code == "V004"]
    assert any("javaFiles elementOf Java" in m for m in flagged)
    # imported registry statements and inferred parts are not flagged
    assert not any("partOf" in m for m in flagged)
    assert all(d.span is not None and d.span.file.endswith("DataBinding.megal") for d in result.diagnostics if d.code == "V004")


def test_broken_artifacts(run):
    result = run("Broken.megal")
    found = statuses(result)
    assert found[("truncated", "elementOf", "XML")] is Status.VIOLATED
    assert found[("invalid", "elementOf", "XML")] is Status.SATISFIED
    assert found[("schema", "elementOf", "XSD")] is Status.SATISFIED
    assert found[("invalid", "conformsTo", "schema")] is Status.VIOLATED
    assert found[("missing", "elementOf", "XML")] is Status.UNRESOLVED
    assert "W201" in codes(result)
    assert result.exit_code() == 1


def test_violation_messages_name_the_fragment(run):
    result = run("Broken.megal")
    conformance = result.report.find("invalid", "conformsTo", "schema")
    assert [m.text for m in conformance.messages] == [
        "element 'boss' is not allowed in 'department'",
        "element 'boss' is not declared",
    ]
    assert conformance.messages[0].fragment == "xml/invalid-company.xml"
    truncated = result.report.find("truncated", "elementOf", "XML")
    assert truncated.messages[0].text.startswith("not well-formed XML at")


def test_regex_language(run):
    found = statuses(run("Versions.megal"))
    assert found[("release", "elementOf", "SemVer")] is Status.SATISFIED
    assert found[("draft", "elementOf", "SemVer")] is Status.VIOLATED


def test_archive_member(run):
    result = run("Archive.megal")
    assert statuses(result)[("content", "elementOf", "XML")] is Status.SATISFIED
    assert result.table.single("second").payload.get("id") == "b"


def test_transient_snapshot(run):
    result = run("Capture.megal")
    assert statuses(result)[("snapshot", "elementOf", "XML")] is Status.SATISFIED
    assert result.events.count("capture:companySnapshot") == 1


def test_failed_capture_leaves_statement_unresolved(run, workspace):
    (workspace / "Snap.megal").write_text(
        "module Snap import (Analyses)\nXML : Language\nXML = 'builtin-lang:xml'\n"
        "bad : Transient\nbad = 'transient:broken'\nbad elementOf XML\n",
        encoding="utf-8",
    )
    result = run("Snap.megal")
    assert statuses(result)[("bad", "elementOf", "XML")] is Status.UNRESOLVED
    assert "W202" in codes(result)
    assert not any(e.startswith("capture:") for e in result.events)


def test_statuses_partition_the_statements(run):
    result = run("Broken.megal", until="evaluate")
    counts = result.report.counts()
    assert sum(counts.values()) == len(result.report.results)
    assert len(result.report.results) == len(result.model.statements) + len(result.model.applications)


# ---------- registry ----------

def test_registry_from_analyses(linked):
    model, _ = linked("module M import (Analyses)")
    registry, diagnostics = build_registry(model)
    assert diagnostics == []
    data = registry.to_dict()
    assert sorted(data) == ["Artifact", "Concept", "Language", "Technology", "conformsTo", "correspondsTo", "elementOf"]
    assert [r["implementation"] for r in data["Language"]] == ["builtin:annotationScheme"]
    (membership,) = data["elementOf"]
    assert membership["implementation"] == "builtin:composite"
    assert [c["plugin"] for c in membership["children"]] == ["XMLWellformed", "RegexLanguage"]
    assert [e.name for e in registry.evaluators_for("elementOf")] == ["xmlWellformed", "regexLanguage"]
    assert registry.evaluators_for("Artifact") == []


@pytest.mark.parametrize("uri", ["builtin:nothing", "exec:unconfigured"])
def test_unknown_implementation(linked, uri):
    model, _ = linked(f"module M\nOdd : Plugin\nOdd = '{uri}'\nconformsTo evaluatedBy Odd")
    registry, diagnostics = build_registry(model)
    assert [d.code for d in diagnostics] == ["W301"]
    assert registry.evaluators_for("conformsTo") == []


class Faulty(Evaluator):
    name = "faulty"

    def applies_to(self, rel, ctx):
        return True

    def evaluate(self, rel, ctx):
        raise KeyError("boom")


class Constant(Evaluator):
    def __init__(self, report):
        self.name = report.status.value
        self.report = report

    def applies_to(self, rel, ctx):
        return True

    def evaluate(self, rel, ctx):
        return self.report


PAIR = "module M\na : Artifact\nb : Artifact\na = 'tree/a.txt'\nb = 'tree/b.txt'\na conformsTo b"


def registry_of(*evaluators) -> Registry:
    return Registry({"conformsTo": [PluginNode(e.name, "test", e) for e in evaluators]})


def test_faulting_evaluator(ws, linked):
    model, _ = linked(PAIR)
    table, _ = resolve_all_bindings(model, ws)
    report = verify(model, table, registry_of(Faulty()))
    assert report.status_of("a", "conformsTo", "b") is Status.NOT_EVALUATED
    assert [d.code for d in report.diagnostics] == ["V001"]


def test_violated_wins(ws, linked):
    model, _ = linked(PAIR)
    table, _ = resolve_all_bindings(model, ws)
    satisfied = Constant(EvalReport.satisfied([Message("info", "fine")]))
    violated = Constant(EvalReport.violated([Message("error", "no")]))
    report = verify(model, table, registry_of(satisfied, violated))
    found = report.find("a", "conformsTo", "b")
    assert found.status is Status.VIOLATED
    assert [m.text for m in found.messages] == ["fine", "no"]


def test_violated_report_needs_a_message():
    with pytest.raises(ValueError):
        EvalReport.violated([])
    with pytest.raises(ValueError):
        EvalReport(Status.UNRESOLVED)


# ---------- analyses ----------

def test_mini_schema():
    schema = MiniSchema(parse_xml((FIXTURES / "workspace" / "xml" / "schema.xsd").read_bytes()))
    assert schema.allowed["department"] == {"manager", "employee"}
    assert schema.allowed["manager"] == {"name", "salary"}
    assert schema.violations(parse_xml(b"<company><department/></company>")) == []
    assert schema.violations(parse_xml(b"<company><boss/></company>")) == [
        "element 'boss' is not allowed in 'company'",
        "element 'boss' is not declared",
    ]


def test_named_types_are_not_elements():
    xsd = (
        b'<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">'
        b'<xs:complexType name="addressType"><xs:sequence><xs:element name="street"/></xs:sequence></xs:complexType>'
        b'<xs:element name="address" type="addressType"/>'
        b"</xs:schema>"
    )
    schema = MiniSchema.from_bytes(xsd)
    assert "addressType" not in schema.allowed
    assert schema.allowed["address"] == {"street"}
    assert schema.violations(parse_xml(b"<address><street/></address>")) == []
    assert schema.violations(parse_xml(b"<addressType/>")) == ["element 'addressType' is not declared"]


def test_empty_schema_rejects_everything():
    assert MiniSchema.from_bytes(b"").violations(parse_xml(b"<a/>")) == ["element 'a' is not declared"]
    assert MiniSchema.from_bytes(b"<notASchema/>") is None


@pytest.mark.parametrize(
    "label, expected",
    [("Company.java", "company"), ("xs:complexType", "complextype"), ("employee#1", "employee"), ("Department", "department")],
)
def test_normalize_label(label, expected):
    assert normalize_label(label) == expected


def test_name_correspondence_needs_parts(ws, linked):
    model, _ = linked("module M\na : Artifact\nb : Artifact\na correspondsTo b")
    table, _ = resolve_all_bindings(model, ws)
    report = verify(model, table, Registry({"correspondsTo": [PluginNode("n", "test", NameCorrespondence())]}))
    assert report.status_of("a", "correspondsTo", "b") is Status.NOT_EVALUATED
