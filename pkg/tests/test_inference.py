import random

import networkx as nx
import pytest

from megal.exceptions.exception import FixedPointNotReached
from megal.models.inference import (
    AnnotationScheme,
    ElementOfLifting,
    EngineConfig,
    Inference,
    Inferrer,
    PartInferrer,
    SubsetTransitivity,
    fragment_name,
    inferred,
    run_inference,
)
from megal.models.megamodel import Entity, OriginKind, RelStmt, canonical_dict
from megal.models.prelude import prelude_module
from megal.models.resolver import resolve_all_bindings


def random_graph(seed: int) -> nx.DiGraph:
    rng = random.Random(seed)
    n = rng.randint(1, 8)
    graph = nx.DiGraph()
    graph.add_nodes_from(f"L{i}" for i in range(n))
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if a != b:
            graph.add_edge(f"L{a}", f"L{b}")
    return graph


def language_model(graph: nx.DiGraph, members: dict[str, str] | None = None):
    items = [Entity(n, "Language") for n in sorted(graph.nodes)]
    items += [RelStmt(a, "subsetOf", b) for a, b in sorted(graph.edges)]
    for artifact, language in sorted((members or {}).items()):
        items += [Entity(artifact, "Artifact"), RelStmt(artifact, "elementOf", language)]
    return prelude_module().extend(items)


def pairs(model, predicate):
    return {(s.subject, s.object) for s in model.relations(predicate)}


# ---------- closure rules ----------

@pytest.mark.parametrize("seed", range(200))
def test_subset_closure_matches_transitive_closure(seed):
    graph = random_graph(seed)
    model = language_model(graph)
    result = run_inference(model, None, [SubsetTransitivity()])
    assert pairs(result.model, "subsetOf") == set(nx.transitive_closure(graph, reflexive=False).edges)
    n = graph.number_of_nodes()
    assert result.rounds <= n * n + 1


@pytest.mark.parametrize("seed", range(50))
def test_element_of_lifting_follows_reachability(seed):
    graph = random_graph(seed)
    rng = random.Random(seed)
    members = {f"x{i}": rng.choice(sorted(graph.nodes)) for i in range(3)}
    model = language_model(graph, members)
    result = run_inference(model, None, [SubsetTransitivity(), ElementOfLifting()])
    expected = {(x, m) for x, lang in members.items() for m in {lang} | nx.descendants(graph, lang)}
    assert pairs(result.model, "elementOf") == expected


@pytest.mark.parametrize("seed", range(20))
def test_inference_only_adds(seed):
    model = language_model(random_graph(seed), {"x": "L0"})
    result = run_inference(model, None, [SubsetTransitivity(), ElementOfLifting()])
    assert set(model.elements()) <= set(result.model.elements())
    assert result.added == result.model.size() - model.size()
    assert all(e.origin.kind is OriginKind.INFERRED for e in inferred(result.model))


@pytest.mark.parametrize("seed", range(20))
def test_inferrer_order_does_not_matter(seed):
    model = language_model(random_graph(seed), {"x": "L0", "y": "L0"})
    forward = run_inference(model, None, [SubsetTransitivity(), ElementOfLifting()])
    backward = run_inference(model, None, [ElementOfLifting(), SubsetTransitivity()])
    assert canonical_dict(forward.model) == canonical_dict(backward.model)
    assert forward.rounds == backward.rounds


def test_inferred_origin_names_the_rule():
    graph = nx.DiGraph([("Custom", "XMI"), ("XMI", "XML")])
    result = run_inference(language_model(graph), None, [SubsetTransitivity()])
    (found,) = [s for s in result.model.relations("subsetOf") if s.key == ("Custom", "subsetOf", "XML")]
    assert str(found.origin) == "inferred:subsetTransitivity"
    assert result.rounds == 2


def test_fixed_point_not_reached():
    graph = nx.DiGraph([("A", "B"), ("B", "C")])
    with pytest.raises(FixedPointNotReached) as exc:
        run_inference(language_model(graph), None, [SubsetTransitivity()], EngineConfig(max_rounds=1))
    assert exc.value.code == "I002"


def test_engine_config_rejects_zero_rounds():
    with pytest.raises(ValueError):
        EngineConfig(max_rounds=0)


class Exploding(Inferrer):
    name = "exploding"

    def applies_to(self, element):
        return isinstance(element, RelStmt)

    def infer(self, model, table, element):
        raise RuntimeError("boom")


class Dangling(Inferrer):
    name = "dangling"

    def applies_to(self, element):
        return isinstance(element, Entity) and element.name == "A"

    def infer(self, model, table, element):
        return Inference([RelStmt("A", "subsetOf", "Nowhere", self.origin)])


def test_faulting_inferrer_is_disabled():
    graph = nx.DiGraph([("A", "B"), ("B", "C")])
    result = run_inference(language_model(graph), None, [Exploding(), SubsetTransitivity()])
    assert [d.code for d in result.diagnostics] == ["I001"]
    assert "exploding" in result.diagnostics[0].message
    assert ("A", "C") in pairs(result.model, "subsetOf")


def test_ill_formed_addition_is_rejected():
    result = run_inference(language_model(nx.DiGraph([("A", "B")])), None, [Dangling()])
    assert result.added == 0
    assert {d.code for d in result.diagnostics} == {"I001"}


# ---------- parts ----------

def test_fragment_name():
    assert fragment_name("xsdFiles", "xs:complexType") == "xsdFiles_xs_complexType"
    assert fragment_name("xsdFiles", "xs:element#0") == "xsdFiles_xs_element_0"
    assert fragment_name("tree", "sub/c.txt") == "tree_sub_c_txt"


def test_parts_of_a_directory(ws, linked):
    model, _ = linked("module M\ntree : Artifact\ntree = 'tree'")
    table, _ = resolve_all_bindings(model, ws)
    result = run_inference(model, table, [PartInferrer(3)])
    out = result.model
    assert out.parts_of("tree") == ["tree_a_txt", "tree_b_txt", "tree_sub"]
    assert out.parts_of("tree_sub") == ["tree_sub_c_txt"]
    assert [b.uri for b in out.bindings_of("tree_sub_c_txt")] == ["tree/sub/c.txt"]
    assert str(out.entity("tree_sub_c_txt").origin) == "inferred:parts"
    assert table.single("tree_sub_c_txt").content() == b"gamma\n"
    assert result.rounds == 3


def test_part_depth_is_bounded(ws, linked):
    model, _ = linked("module M\ntree : Artifact\ntree = 'tree'")
    table, _ = resolve_all_bindings(model, ws)
    out = run_inference(model, table, [PartInferrer(1)]).model
    assert out.parts_of("tree_sub") == []


def test_parts_of_an_xml_document(ws, linked):
    model, _ = linked("module M\nschema : Artifact\nschema = 'xml/schema.xsd'")
    table, diagnostics = resolve_all_bindings(model, ws)
    assert diagnostics == []
    out = run_inference(model, table, [PartInferrer(1)]).model
    assert out.parts_of("schema") == ["schema_xs_complexType", "schema_xs_element_0", "schema_xs_element_1"]
    assert [b.uri for b in out.bindings_of("schema_xs_element_1")] == ["xml/schema.xsd/xs:schema/xs:element#1"]
    assert table.single("schema_xs_element_1").payload.get("name") == "department"


BILLING_XSD = """<?xml version="1.0"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
  <xs:element name="invoice"/>
</xs:schema>
"""


def test_parts_of_every_binding_of_a_plural_artifact(workspace, ws, linked):
    (workspace / "xml" / "billing.xsd").write_text(BILLING_XSD, encoding="utf-8")
    model, _ = linked("module M\nschemas : Artifact+\nschemas = 'xml/schema.xsd'\nschemas = 'xml/billing.xsd'")
    table, diagnostics = resolve_all_bindings(model, ws)
    assert diagnostics == []
    assert len(table.get("schemas")) == 2
    out = run_inference(model, table, [PartInferrer(1)]).model
    assert sorted(out.parts_of("schemas")) == [
        "schemas_billing_xsd_xs_element",
        "schemas_schema_xsd_xs_complexType",
        "schemas_schema_xsd_xs_element_0",
        "schemas_schema_xsd_xs_element_1",
    ]
    assert [b.uri for b in out.bindings_of("schemas_billing_xsd_xs_element")] == ["xml/billing.xsd/xs:schema/xs:element"]
    assert table.single("schemas_billing_xsd_xs_element").payload.get("name") == "invoice"


def test_unbound_and_unresolved_artifacts_have_no_parts(ws, linked):
    model, _ = linked("module M\nghost : Artifact\nmissing : Artifact\nmissing = 'tree/nothing'")
    table, _ = resolve_all_bindings(model, ws)
    result = run_inference(model, table, [PartInferrer(3)])
    assert result.added == 0
    assert result.rounds == 1


# ---------- annotations ----------

def test_annotation_scheme(linked):
    text = "module M\nXML : Language\nJava : Language\nJava = 'http://example.org/java'\nPersistence : Concept\nfile : Artifact"
    model, _ = linked(text)
    known = {"XML": "http://x/XML", "Java": "http://x/Java", "Persistence": "http://x/P", "file": "http://x/file"}
    out = run_inference(model, None, [AnnotationScheme(known)]).model
    assert [b.uri for b in out.bindings_of("XML")] == ["http://x/XML"]
    assert [b.uri for b in out.bindings_of("Java")] == ["http://example.org/java"]
    assert [str(b.origin) for b in out.bindings_of("Persistence")] == ["inferred:annotationScheme"]
    assert out.bindings_of("file") == []


def test_bundled_knowledge_map(linked):
    model, _ = linked("module M\nXSD : Language")
    out = run_inference(model, None, [AnnotationScheme()]).model
    assert [b.uri for b in out.bindings_of("XSD")] == ["http://dbpedia.org/page/XML_Schema_(W3C)"]
