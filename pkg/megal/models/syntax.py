"""
Tokenizer, parser and pretty printer for MegaL module text.

One statement per line; a statement continues on the next line only inside
an import list or after a token that cannot end a statement (`=`, `:`, ...).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum

from ..exceptions.exception import (
    IllegalCharacter,
    MegalException,
    MegalSyntaxError,
    MissingModuleHeader,
    ParseError,
    UnterminatedString,
)
from .diagnostics import SourceSpan

log = logging.getLogger(__name__)


class TokenKind(str, Enum):
    IDENT = "Ident"
    STRING = "String"
    COLON = "Colon"
    PLUS = "Plus"
    LT = "Lt"
    STAR = "Star"
    ARROW = "Arrow"
    MAPSTO = "MapsTo"
    LPAREN = "LParen"
    RPAREN = "RParen"
    LBRACKET = "LBracket"
    RBRACKET = "RBracket"
    COMMA = "Comma"
    EQUALS = "Equals"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan

    @property
    def value(self) -> str:
        if self.kind is TokenKind.STRING:
            return self.text[1:-1]
        return self.text

    @property
    def end(self) -> int:
        return self.span.offset + len(self.text)


_PATTERNS = [
    (None, r"[ \t\r\n\f\ufeff]+"),
    (None, r"//[^\n]*"),
    (TokenKind.MAPSTO, r"\|->|↦"),
    (TokenKind.ARROW, r"->|→"),
    (TokenKind.IDENT, r"[A-Za-z_][A-Za-z0-9_]*"),
    (TokenKind.STRING, r"\"[^\"\n]*\"|'[^'\n]*'"),
    (TokenKind.COLON, r":"),
    (TokenKind.PLUS, r"\+"),
    (TokenKind.LT, r"<"),
    (TokenKind.STAR, r"\*"),
    (TokenKind.LPAREN, r"\("),
    (TokenKind.RPAREN, r"\)"),
    (TokenKind.LBRACKET, r"\["),
    (TokenKind.RBRACKET, r"\]"),
    (TokenKind.COMMA, r","),
    (TokenKind.EQUALS, r"="),
]
_MASTER = re.compile("|".join(f"(?P<g{i}>{p})" for i, (_, p) in enumerate(_PATTERNS)))

# tokens after which a line break does not end the statement
_CONTINUATION = {
    TokenKind.COLON, TokenKind.LT, TokenKind.STAR, TokenKind.ARROW, TokenKind.MAPSTO,
    TokenKind.EQUALS, TokenKind.LPAREN, TokenKind.LBRACKET, TokenKind.COMMA,
}


def _scan(text: str, file: str):
    """Yields tokens; tokenize errors are yielded as exceptions so callers can resynchronize."""
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        span = SourceSpan(file, line, pos - line_start + 1, 1, pos)
        m = _MASTER.match(text, pos)
        if m is None:
            ch = text[pos]
            if ch in "\"'":
                newline = text.find("\n", pos)
                stop = len(text) if newline < 0 else newline
                yield UnterminatedString("unterminated string", SourceSpan(file, line, span.column, stop - pos, pos))
                pos = stop
            else:
                yield IllegalCharacter(f"illegal character {ch!r}", span)
                pos += 1
            continue
        lexeme = m.group()
        kind = _PATTERNS[int(m.lastgroup[1:])][0]
        if kind is not None:
            yield Token(kind, lexeme, SourceSpan(file, line, span.column, len(lexeme), pos))
        breaks = lexeme.count("\n")
        if breaks:
            line += breaks
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens = []
    for item in _scan(text, file):
        if isinstance(item, MegalException):
            raise item
        tokens.append(item)
    return tokens


# ---------- raw AST ----------

class StatementKind(str, Enum):
    ENTITY_DECL = "EntityDecl"
    ENTITY_TYPE_DECL = "EntityTypeDecl"
    REL_TYPE_DECL = "RelTypeDecl"
    FUNC_DECL = "FuncDecl"
    FUNC_APP = "FuncApp"
    REL_STMT = "RelStmt"
    BINDING = "Binding"


_ARITY = {
    StatementKind.ENTITY_DECL: 3,
    StatementKind.ENTITY_TYPE_DECL: 2,
    StatementKind.REL_TYPE_DECL: 3,
    StatementKind.FUNC_DECL: 3,
    StatementKind.FUNC_APP: 3,
    StatementKind.REL_STMT: 3,
    StatementKind.BINDING: 2,
}


@dataclass(frozen=True)
class RawStatement:
    """
    tokens per kind:
        EntityDecl      (name, type, many)
        EntityTypeDecl  (name, supertype)
        RelTypeDecl     (name, left, right)
        FuncDecl        (name, domain, range)
        FuncApp         (function, input, output)
        RelStmt         (subject, predicate, object)
        Binding         (subject, uri)
    """

    kind: StatementKind
    tokens: tuple
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.tokens) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind.value} expects {_ARITY[self.kind]} tokens, got {self.tokens!r}")


@dataclass(frozen=True)
class ImportItem:
    module: str
    renames: tuple[tuple[str, str], ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RawModule:
    name: str
    imports: tuple[ImportItem, ...] = ()
    statements: tuple[RawStatement, ...] = ()
    file: str = field(default="<input>", compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    def declared_names(self) -> set[str]:
        names = set()
        for st in self.statements:
            if st.kind in (StatementKind.ENTITY_DECL, StatementKind.FUNC_DECL):
                names.add(st.tokens[0])
        return names


# ---------- parser ----------

def _span_of(tokens: list[Token]) -> SourceSpan:
    first, last = tokens[0], tokens[-1]
    return SourceSpan(first.span.file, first.span.line, first.span.column, last.end - first.span.offset, first.span.offset)


def _logical_lines(tokens: list[Token]) -> list[list[Token]]:
    lines: list[list[Token]] = []
    depth = 0
    for tok in tokens:
        if lines and depth == 0 and tok.span.line > lines[-1][-1].span.line and lines[-1][-1].kind not in _CONTINUATION:
            lines.append([tok])
        elif not lines:
            lines.append([tok])
        else:
            lines[-1].append(tok)
        if tok.kind in (TokenKind.LPAREN, TokenKind.LBRACKET):
            depth += 1
        elif tok.kind in (TokenKind.RPAREN, TokenKind.RBRACKET):
            depth = max(0, depth - 1)
    return lines


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def accept(self, *kinds: TokenKind) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind in kinds:
            self.pos += 1
            return tok
        return None

    def expect(self, kind: TokenKind, hint: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not kind:
            raise self.error("unexpected " + (f"'{tok.text}'" if tok else "end of statement"), hint)
        self.pos += 1
        return tok

    def end(self):
        tok = self.peek()
        if tok is not None:
            raise MegalSyntaxError(f"unexpected '{tok.text}'", tok.span, "end of statement")

    def error(self, message: str, hint: str) -> MegalSyntaxError:
        tok = self.peek()
        span = tok.span if tok else self.tokens[-1].span
        return MegalSyntaxError(message, span, hint)


def _header(line: list[Token], file: str) -> tuple[str, tuple[ImportItem, ...]]:
    c = _Cursor(line)
    head = c.peek()
    if head.kind is not TokenKind.IDENT or head.text != "module":
        raise MissingModuleHeader("missing module header", head.span, "'module <Name>'")
    c.pos += 1
    name = c.expect(TokenKind.IDENT, "a module name").text
    imports = []
    kw = c.accept(TokenKind.IDENT)
    if kw is not None:
        if kw.text != "import":
            raise MegalSyntaxError(f"unexpected '{kw.text}'", kw.span, "'import'")
        c.expect(TokenKind.LPAREN, "'('")
        while True:
            mod = c.expect(TokenKind.IDENT, "a module name")
            renames = []
            if c.accept(TokenKind.LBRACKET):
                while True:
                    old = c.expect(TokenKind.IDENT, "a name to rename").text
                    c.expect(TokenKind.ARROW, "'->'")
                    new = c.expect(TokenKind.IDENT, "the new name").text
                    renames.append((old, new))
                    if not c.accept(TokenKind.COMMA):
                        break
                c.expect(TokenKind.RBRACKET, "']'")
            imports.append(ImportItem(mod.text, tuple(renames), mod.span))
            if not c.accept(TokenKind.COMMA):
                break
        c.expect(TokenKind.RPAREN, "')' or ','")
    c.end()
    return name, tuple(imports)


def _statement(line: list[Token]) -> RawStatement:
    c = _Cursor(line)
    span = _span_of(line)
    first = c.expect(TokenKind.IDENT, "a name").text
    tok = c.peek()
    if tok is None:
        raise c.error("incomplete statement", "':', '<', '=', '(' or a relationship name")

    if c.accept(TokenKind.COLON):
        typ = c.expect(TokenKind.IDENT, "a type name").text
        if c.accept(TokenKind.ARROW):
            rng = c.expect(TokenKind.IDENT, "a range language").text
            c.end()
            return RawStatement(StatementKind.FUNC_DECL, (first, typ, rng), span)
        many = c.accept(TokenKind.PLUS) is not None
        c.end()
        return RawStatement(StatementKind.ENTITY_DECL, (first, typ, many), span)

    if c.accept(TokenKind.LT):
        left = c.expect(TokenKind.IDENT, "a type name").text
        if c.accept(TokenKind.STAR):
            right = c.expect(TokenKind.IDENT, "a type name").text
            c.end()
            return RawStatement(StatementKind.REL_TYPE_DECL, (first, left, right), span)
        c.end()
        return RawStatement(StatementKind.ENTITY_TYPE_DECL, (first, left), span)

    if c.accept(TokenKind.EQUALS):
        uri = c.expect(TokenKind.STRING, "a quoted URI").value
        c.end()
        return RawStatement(StatementKind.BINDING, (first, uri), span)

    if c.accept(TokenKind.LPAREN):
        arg = c.expect(TokenKind.IDENT, "an argument name").text
        c.expect(TokenKind.RPAREN, "')'")
        if c.accept(TokenKind.MAPSTO, TokenKind.ARROW) is None:
            raise c.error("unexpected " + (f"'{c.peek().text}'" if c.peek() else "end of statement"), "'|->'")
        out = c.expect(TokenKind.IDENT, "a result name").text
        c.end()
        return RawStatement(StatementKind.FUNC_APP, (first, arg, out), span)

    if tok.kind is TokenKind.IDENT:
        pred = c.expect(TokenKind.IDENT, "a relationship name").text
        obj = c.expect(TokenKind.IDENT, "an entity name").text
        c.end()
        return RawStatement(StatementKind.REL_STMT, (first, pred, obj), span)

    raise c.error(f"unexpected '{tok.text}'", "':', '<', '=', '(' or a relationship name")


def parse(text: str, file_name: str = "<input>") -> RawModule:
    """
    Parses one module. Errors are collected per statement and raised together
    as `ParseError`; a bad line never hides errors on the lines after it.
    """
    errors: list[MegalException] = []
    tokens: list[Token] = []
    for item in _scan(text, file_name):
        if isinstance(item, MegalException):
            errors.append(item)
        else:
            tokens.append(item)

    lines = _logical_lines(tokens)
    if not lines:
        raise ParseError(errors or [MissingModuleHeader("missing module header", SourceSpan(file_name, 1, 1, 0), "'module <Name>'")])

    name, imports = "", ()
    try:
        name, imports = _header(lines[0], file_name)
    except MegalSyntaxError as exc:
        errors.append(exc)

    statements = []
    for line in lines[1:]:
        try:
            statements.append(_statement(line))
        except MegalSyntaxError as exc:
            errors.append(exc)

    if errors:
        errors.sort(key=lambda e: e.span.offset if e.span else 0)
        raise ParseError(errors)

    log.debug("parsed module %s from %s: %d statements", name, file_name, len(statements))
    return RawModule(name, imports, tuple(statements), file_name, _span_of(lines[0]))


# ---------- pretty printer ----------

def _quote(value: str) -> str:
    return f"'{value}'" if '"' in value else f'"{value}"'


def format_statement(st: RawStatement) -> str:
    t = st.tokens
    if st.kind is StatementKind.ENTITY_DECL:
        return f"{t[0]} : {t[1]}" + ("+" if t[2] else "")
    if st.kind is StatementKind.ENTITY_TYPE_DECL:
        return f"{t[0]} < {t[1]}"
    if st.kind is StatementKind.REL_TYPE_DECL:
        return f"{t[0]} < {t[1]} * {t[2]}"
    if st.kind is StatementKind.FUNC_DECL:
        return f"{t[0]} : {t[1]} -> {t[2]}"
    if st.kind is StatementKind.FUNC_APP:
        return f"{t[0]}({t[1]}) |-> {t[2]}"
    if st.kind is StatementKind.REL_STMT:
        return f"{t[0]} {t[1]} {t[2]}"
    return f"{t[0]} = {_quote(t[1])}"


def format_module(module: RawModule) -> str:
    header = f"module {module.name}"
    if module.imports:
        items = []
        for item in module.imports:
            text = item.module
            if item.renames:
                text += " [" + ", ".join(f"{old} -> {new}" for old, new in item.renames) + "]"
            items.append(text)
        header += " import (" + ", ".join(items) + ")"
    return "\n".join([header, *(format_statement(st) for st in module.statements)]) + "\n"
