import json

import pytest
from click.testing import CliRunner

from megal.cli import cli

from .test_trace import DATA_BINDING_TRACE


@pytest.fixture
def invoke(workspace):
    runner = CliRunner()

    def _invoke(command, root, *args):
        argv = [command, str(workspace / root), "--config", str(workspace / "megal.config.json"), *args]
        return runner.invoke(cli, argv)

    return _invoke


def test_check_passes(invoke):
    result = invoke("check", "DataBinding.megal")
    assert result.exit_code == 0, result.output
    assert "Satisfied" in result.stdout


def test_strict_fails_on_incomplete_verification(invoke):
    assert invoke("check", "DataBinding.megal", "--strict").exit_code == 1


def test_check_reports_violations(invoke):
    result = invoke("check", "Broken.megal")
    assert result.exit_code == 1
    assert "Violated truncated elementOf XML" in result.stdout
    assert "W201" in result.stdout


def test_check_json(invoke):
    result = invoke("check", "Versions.megal", "--format", "json")
    data = json.loads(result.stdout)
    assert data["exitCode"] == result.exit_code == 1
    statuses = {(s["subject"], s["object"]): s["status"] for s in data["statements"]}
    assert statuses[("release", "SemVer")] == "Satisfied"
    assert statuses[("draft", "SemVer")] == "Violated"
    assert data["summary"]["Violated"] == 1


def test_emit_model(invoke, tmp_path):
    target = tmp_path / "model.json"
    assert invoke("check", "DataBinding.megal", "--emit-model", str(target)).exit_code == 0
    data = json.loads(target.read_text(encoding="utf-8"))
    names = {e["name"] for e in data["entities"]}
    assert {"xmlFile", "xsdFiles_xs_element_0", "javaFiles_Company_java"} <= names


def test_graph_dot(invoke):
    result = invoke("graph", "DataBinding.megal")
    assert result.exit_code == 0
    assert "xmlFile -> xsdFiles [label=conformsTo]" in result.stdout
    assert result.stdout.startswith("// megamodel DataBinding")


def test_graph_json_of_empty_module(invoke):
    result = invoke("graph", "Empty.megal", "--format", "json")
    assert json.loads(result.stdout) == {"entities": [], "statements": [], "traces": []}


def test_graph_is_deterministic(invoke):
    first = invoke("graph", "DataBinding.megal", "--format", "json").stdout
    second = invoke("graph", "DataBinding.megal", "--format", "json").stdout
    assert first == second


@pytest.mark.parametrize(
    "command, args",
    [("check", ()), ("check", ("--format", "json")), ("explore", ())],
)
def test_output_is_deterministic(invoke, command, args):
    first = invoke(command, "DataBinding.megal", *args)
    second = invoke(command, "DataBinding.megal", *args)
    assert first.exit_code == second.exit_code == 0
    assert first.stdout == second.stdout


def test_trace(invoke):
    result = invoke("trace", "DataBinding.megal", "xsdFiles/javaFiles")
    assert result.exit_code == 0
    assert result.stdout == DATA_BINDING_TRACE


def test_trace_unknown_statement(invoke):
    result = invoke("trace", "DataBinding.megal", "xmlFile/xsdFiles")
    assert result.exit_code == 1
    assert "T001" in result.stderr


def test_trace_bad_selector(invoke):
    assert invoke("trace", "DataBinding.megal", "xsdFiles").exit_code == 2


def test_explore(invoke):
    result = invoke("explore", "DataBinding.megal")
    data = json.loads(result.stdout)
    assert data["module"] == "DataBinding"
    xml_file = next(e for e in data["entities"] if e["name"] == "xmlFile")
    (binding,) = xml_file["bindings"]
    assert binding["resolvedPath"] == "xml/company.xml"
    assert binding["children"] == ["company/department"]
    assert all(s["status"] is not None for s in data["statements"])
    assert all(s["origin"] != "inferred:trace" for s in data["statements"])
    assert data["traces"]


def test_explore_entry_per_binding(invoke, workspace):
    (workspace / "Pair.megal").write_text(
        "module Pair\ndocs : Artifact+\ndocs = 'xml/schema.xsd'\ndocs = 'xml/company.xml'\n", encoding="utf-8"
    )
    data = json.loads(invoke("explore", "Pair.megal").stdout)
    docs = next(e for e in data["entities"] if e["name"] == "docs")
    schema, company = docs["bindings"]
    assert schema["resolvedPath"] == "xml/schema.xsd"
    assert schema["children"] == ["xs:schema/xs:complexType", "xs:schema/xs:element#0", "xs:schema/xs:element#1"]
    assert company["resolvedPath"] == "xml/company.xml"
    assert company["children"] == ["company/department"]


def test_verbose_prints_events(invoke):
    result = invoke("check", "Capture.megal", "--verbose")
    assert "events: parse link check resolve capture:companySnapshot infer evaluate trace" in result.stderr


def test_missing_module(invoke, workspace):
    (workspace / "Lost.megal").write_text("module Lost import (Nowhere)\n", encoding="utf-8")
    result = invoke("check", "Lost.megal")
    assert result.exit_code == 1
    assert "L001" in result.stdout


def test_graph_fails_on_errors(invoke, workspace):
    (workspace / "Lost.megal").write_text("module Lost import (Nowhere)\n", encoding="utf-8")
    result = invoke("graph", "Lost.megal")
    assert result.exit_code == 1
    assert "L001" in result.stderr


def test_bad_config(invoke, workspace):
    (workspace / "megal.config.json").write_text("{not json", encoding="utf-8")
    result = invoke("check", "DataBinding.megal")
    assert result.exit_code == 2
    assert "invalid JSON" in result.stderr
