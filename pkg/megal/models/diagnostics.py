"""Source spans and diagnostics shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass, field

SEVERITIES = ("error", "warning", "info")


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0
    offset: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self.file}:{self.line}:{self.column}+{self.length}")

    def to_dict(self) -> dict:
        return {"file": self.file, "line": self.line, "column": self.column, "length": self.length}

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    message: str
    span: SourceSpan | None = None
    related: SourceSpan | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "span": self.span.to_dict() if self.span else None,
            "related": self.related.to_dict() if self.related else None,
        }

    def format(self) -> str:
        where = str(self.span) if self.span else "<model>"
        text = f"{where}: {self.severity} {self.code} {self.message}"
        if self.related:
            text += f" (see {self.related})"
        return text


def error(code: str, message: str, span: SourceSpan | None = None, related: SourceSpan | None = None) -> Diagnostic:
    return Diagnostic(code, "error", message, span, related)


def warning(code: str, message: str, span: SourceSpan | None = None) -> Diagnostic:
    return Diagnostic(code, "warning", message, span)


def has_errors(diagnostics) -> bool:
    return any(d.is_error for d in diagnostics)


def format_human(diagnostics) -> str:
    return "\n".join(d.format() for d in diagnostics)

