from megal.models.config import load_config
from megal.models.pipeline import module_search_path, run_pipeline

from .conftest import workspace_config, write_config

STAGES = ["parse", "link", "check", "resolve", "infer", "evaluate", "trace"]


def test_stage_events(run):
    assert run("DataBinding.megal").events == STAGES


def test_capture_runs_between_resolve_and_infer(run):
    events = run("Capture.megal").events
    assert events == ["parse", "link", "check", "resolve", "capture:companySnapshot", "infer", "evaluate", "trace"]


def test_until_stops_after_stage(run):
    result = run("DataBinding.megal", until="resolve")
    assert result.events == STAGES[:4]
    assert result.table is not None
    assert result.report is None
    assert result.exit_code() == 0


def test_parse_error_stops_the_run(run, workspace):
    (workspace / "Bad.megal").write_text("module Bad\nx : \n", encoding="utf-8")
    result = run("Bad.megal")
    assert result.events == ["parse"]
    assert result.model is None
    assert [d.code for d in result.diagnostics] == ["P001"]
    assert result.exit_code() == 1


def test_missing_import_stops_the_run(run, workspace):
    (workspace / "Lost.megal").write_text("module Lost import (Nowhere)\n", encoding="utf-8")
    result = run("Lost.megal")
    assert [d.code for d in result.diagnostics] == ["L001"]
    assert result.exit_code() == 1


def test_checker_errors_stop_after_check(run, workspace):
    (workspace / "Wrong.megal").write_text("module Wrong\nx : Artifact\nx elementOf Nothing\n", encoding="utf-8")
    result = run("Wrong.megal")
    assert result.events == ["parse", "link", "check"]
    assert "E001" in [d.code for d in result.diagnostics]
    assert result.table is None


def test_round_limit_keeps_going(workspace):
    data = workspace_config()
    data["inference"] = {"maxRounds": 1}
    result = run_pipeline(workspace / "DataBinding.megal", load_config(write_config(workspace, data)))
    assert "I002" in [d.code for d in result.diagnostics]
    assert result.inference is None
    assert result.events == STAGES
    assert result.report is not None


def test_module_path_from_cli_comes_first(workspace, config, tmp_path):
    extra = tmp_path / "extra"
    extra.mkdir()
    assert module_search_path([extra], config) == [extra, *config.module_paths]
    assert config.module_paths == [(workspace / "modules").resolve()]


def test_cli_module_path_shadows_config(workspace, config, tmp_path):
    extra = tmp_path / "extra"
    extra.mkdir()
    (extra / "XML.megal").write_text("module XML\nShadow : Language\n", encoding="utf-8")
    (workspace / "UsesXml.megal").write_text("module UsesXml import (XML)\n", encoding="utf-8")
    result = run_pipeline(workspace / "UsesXml.megal", config, [extra])
    assert result.model.has_name("Shadow")
    assert not result.model.has_name("xmlFile")


def test_inference_plugins_come_from_the_registry(workspace, config):
    (workspace / "Bare.megal").write_text(
        "module Bare\nJava : Language\nschema : Artifact\nschema = 'xml/schema.xsd'\n", encoding="utf-8"
    )
    bare = run_pipeline(workspace / "Bare.megal", config)
    assert bare.registry.roots == {}
    assert bare.model.parts_of("schema") == []
    assert bare.model.bindings_of("Java") == []


def test_inference_plugin_is_scoped_to_its_entity_type(workspace, config):
    (workspace / "Scoped.megal").write_text(
        "module Scoped\nSplitter : Plugin\nSplitter = 'builtin:parts'\nTransient evaluatedBy Splitter\n"
        "schema : Artifact\nschema = 'xml/schema.xsd'\n"
        "snapshot : Transient\nsnapshot = 'transient:companySnapshot'\n",
        encoding="utf-8",
    )
    result = run_pipeline(workspace / "Scoped.megal", config)
    assert "W301" not in [d.code for d in result.diagnostics]
    assert result.model.parts_of("schema") == []
    assert result.model.parts_of("snapshot") == ["snapshot_department"]
    # fragments are plain artifacts, outside the Transient scope
    assert result.model.parts_of("snapshot_department") == []


def test_analyses_registers_parts_and_annotations(run):
    result = run("DataBinding.megal")
    assert result.model.parts_of("xsdFiles") == ["xsdFiles_xs_complexType", "xsdFiles_xs_element_0", "xsdFiles_xs_element_1"]
    assert [str(b.origin) for b in result.model.bindings_of("Java")] == ["inferred:annotationScheme"]
