import re

import pytest

from megal.exceptions.exception import IllegalCharacter, MissingModuleHeader, ParseError, UnterminatedString
from megal.models.syntax import (
    ImportItem,
    RawStatement,
    StatementKind,
    TokenKind,
    format_module,
    parse,
    tokenize,
)

from .conftest import MODULES

CORPUS = sorted(MODULES.glob("*.megal"))
_GAP = re.compile(r"(?:[ \t\r\n\f\ufeff]+|//[^\n]*)*")


def kinds(text):
    return [t.kind for t in tokenize(text)]


# ---------- tokenize ----------

def test_tokenize_relationship_line():
    tokens = tokenize("XSD subsetOf XML")
    assert [(t.kind, t.text) for t in tokens] == [
        (TokenKind.IDENT, "XSD"),
        (TokenKind.IDENT, "subsetOf"),
        (TokenKind.IDENT, "XML"),
    ]


def test_tokenize_empty_input():
    assert tokenize("") == []


def test_tokenize_unicode_and_ascii_arrows_agree():
    expected = [TokenKind.IDENT, TokenKind.LPAREN, TokenKind.IDENT, TokenKind.RPAREN, TokenKind.MAPSTO, TokenKind.IDENT]
    assert kinds("transformation(input) ↦ output") == expected
    assert kinds("transformation(input) |-> output") == expected
    assert kinds("f : A → B") == kinds("f : A -> B")


def test_tokenize_drops_comments():
    assert kinds("x : Artifact // a file") == [TokenKind.IDENT, TokenKind.COLON, TokenKind.IDENT]


def test_both_string_delimiters():
    single, double = tokenize("'http://x/a'")[0], tokenize('"http://x/a"')[0]
    assert single.kind is double.kind is TokenKind.STRING
    assert single.value == double.value == "http://x/a"


def test_unterminated_string():
    with pytest.raises(UnterminatedString) as exc:
        tokenize('xmlFile = "abc\nxsd : Artifact')
    assert exc.value.span.line == 1
    assert exc.value.span.column == 11


def test_illegal_character_has_span():
    with pytest.raises(IllegalCharacter) as exc:
        tokenize("a\nb $ c")
    assert (exc.value.span.line, exc.value.span.column) == (2, 3)
    assert exc.value.code == "P001"


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_token_coverage(path):
    text = path.read_text(encoding="utf-8")
    pos = 0
    for tok in tokenize(text, str(path)):
        assert _GAP.fullmatch(text, pos, tok.span.offset), f"unexpected text before {tok}"
        assert text[tok.span.offset:tok.end] == tok.text
        pos = tok.end
    assert _GAP.fullmatch(text, pos)


# ---------- parse ----------

def test_parse_xml_module():
    module = parse((MODULES / "XML.megal").read_text(encoding="utf-8"), "XML.megal")
    assert module.name == "XML"
    assert [i.module for i in module.imports] == ["Prelude"]
    # eight statements of the listing plus the annotation binding
    assert len(module.statements) == 9
    assert module.statements[0] == RawStatement(StatementKind.ENTITY_DECL, ("XML", "Language", False))
    assert module.statements[2] == RawStatement(StatementKind.REL_STMT, ("XSD", "subsetOf", "XML"))
    assert module.statements[2].span.line == 4


def test_parse_header_only():
    module = parse("module M import (Prelude)")
    assert module.name == "M"
    assert module.statements == ()


def test_parse_plural_entity():
    (st,) = parse("module M\nxsdFiles : Artifact+").statements
    assert st.kind is StatementKind.ENTITY_DECL
    assert st.tokens == ("xsdFiles", "Artifact", True)


@pytest.mark.parametrize(
    "line, kind, tokens",
    [
        ("transformation : Custom → Custom", StatementKind.FUNC_DECL, ("transformation", "Custom", "Custom")),
        ("QueryLanguage < Language", StatementKind.ENTITY_TYPE_DECL, ("QueryLanguage", "Language")),
        ("conformsTo < Artifact * Artifact", StatementKind.REL_TYPE_DECL, ("conformsTo", "Artifact", "Artifact")),
        ("transformation(input) ↦ output", StatementKind.FUNC_APP, ("transformation", "input", "output")),
        ("EMFGenerator(genModel) → javaFiles", StatementKind.FUNC_APP, ("EMFGenerator", "genModel", "javaFiles")),
        ("xmlFile conformsTo xsdFiles", StatementKind.REL_STMT, ("xmlFile", "conformsTo", "xsdFiles")),
        ("XML = 'http://dbpedia.org/page/XML'", StatementKind.BINDING, ("XML", "http://dbpedia.org/page/XML")),
    ],
)
def test_statement_disambiguation(line, kind, tokens):
    (st,) = parse(f"module M\n{line}").statements
    assert st.kind is kind
    assert st.tokens == tokens


def test_rename_syntax():
    module = parse("module T import (XML [xmlFile -> inputDoc], XML [xmlFile -> outputDoc, XSD -> Schema])")
    assert module.imports == (
        ImportItem("XML", (("xmlFile", "inputDoc"),)),
        ImportItem("XML", (("xmlFile", "outputDoc"), ("XSD", "Schema"))),
    )


def test_multiline_import_and_binding():
    module = parse((MODULES / "EMFModelAPI.megal").read_text(encoding="utf-8"))
    assert [i.module for i in module.imports] == ["EMF", "XML"]
    binding = next(st for st in module.statements if st.kind is StatementKind.BINDING)
    assert binding.tokens == ("Persistence", "http://dbpedia.org/page/Persistence_(computer_science)")


def test_missing_module_header():
    with pytest.raises(ParseError) as exc:
        parse("XML : Language")
    assert isinstance(exc.value.errors[0], MissingModuleHeader)
    assert exc.value.errors[0].code == "P002"


def test_empty_text_has_no_header():
    with pytest.raises(ParseError) as exc:
        parse("")
    assert exc.value.errors[0].code == "P002"


def test_errors_are_collected_per_statement():
    text = "module M\nfoo bar\nok : Artifact\nx : \n"
    with pytest.raises(ParseError) as exc:
        parse(text)
    lines = [e.span.line for e in exc.value.errors]
    assert lines == [2, 4]
    assert "expected" in exc.value.errors[0].message


# ---------- properties ----------

@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_pretty_print_round_trip(path):
    module = parse(path.read_text(encoding="utf-8"), str(path))
    assert parse(format_module(module)) == module


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_statement_spans_are_disjoint(path):
    text = path.read_text(encoding="utf-8")
    spans = sorted(st.span for st in parse(text, str(path)).statements)
    for st_span in spans:
        assert 0 <= st_span.offset and st_span.offset + st_span.length <= len(text)
    for a, b in zip(spans, spans[1:]):
        assert a.offset + a.length <= b.offset
