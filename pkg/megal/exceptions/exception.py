from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ..models.diagnostics import Diagnostic, SourceSpan


class MegalException(Exception):
    """
    Base of every error raised by the toolkit.

    `code` is the stable diagnostic code used when the error is reported
    instead of raised (see `to_diagnostic`).
    """

    code = "E000"
    severity = "error"

    def __init__(self, message: str, span: "SourceSpan | None" = None, related: "SourceSpan | None" = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.related = related

    def to_diagnostic(self) -> "Diagnostic":
        from ..models.diagnostics import Diagnostic

        return Diagnostic(self.code, self.severity, self.message, self.span, self.related)


class ConfigException(MegalException):
    code = "C001"


# ---------- syntax ----------

class TokenizeException(MegalException):
    code = "P001"


class UnterminatedString(TokenizeException):
    pass


class IllegalCharacter(TokenizeException):
    pass


class MegalSyntaxError(MegalException):
    code = "P001"

    def __init__(self, message: str, span=None, expected: str | None = None):
        if expected:
            message = f"{message} (expected {expected})"
        super().__init__(message, span)
        self.expected = expected


class MissingModuleHeader(MegalSyntaxError):
    code = "P002"


class ParseError(MegalException):
    """Raised by `parse` with every statement-level error collected."""

    code = "P001"

    def __init__(self, errors: list[MegalException]):
        first = errors[0]
        super().__init__(first.message, first.span)
        self.errors = errors


# ---------- model ----------

class UnknownName(MegalException):
    code = "E001"

    def __init__(self, name: str, span=None):
        super().__init__(f"unknown name '{name}'", span)
        self.name = name


class UnknownType(MegalException):
    code = "E009"

    def __init__(self, name: str, span=None):
        super().__init__(f"unknown entity type '{name}'", span)
        self.name = name


class TypeCycle(MegalException):
    code = "E009"


class ConflictingDeclaration(MegalException):
    code = "E002"

    def __init__(self, name: str, span=None, related=None):
        super().__init__(f"conflicting declaration of '{name}'", span, related)
        self.name = name


# ---------- linker ----------

class ModuleNotFound(MegalException):
    code = "L001"

    def __init__(self, name: str, span=None):
        super().__init__(f"module '{name}' not found", span)
        self.name = name


class ImportCycle(MegalException):
    code = "L002"

    def __init__(self, cycle: list[str], span=None):
        super().__init__("import cycle: " + " -> ".join(cycle), span)
        self.cycle = cycle


class RenameTargetUnknown(MegalException):
    code = "L003"

    def __init__(self, old: str, module: str, span=None):
        super().__init__(f"cannot rename '{old}': not declared in module '{module}'", span)
        self.old = old


class RenameCollision(MegalException):
    code = "L004"

    def __init__(self, new: str, module: str, span=None):
        super().__init__(f"rename target '{new}' is already taken in module '{module}'", span)
        self.new = new


# ---------- resolver ----------

class MalformedUri(MegalException):
    code = "E007"


class ResolutionException(MegalException):
    code = "W201"
    severity = "warning"


class NoProviderAccepts(ResolutionException):
    pass


class SegmentNotFound(ResolutionException):
    def __init__(self, segment: str, candidates: list[str], span=None):
        shown = ", ".join(candidates[:8]) or "none"
        super().__init__(f"segment '{segment}' not found (candidates: {shown})", span)
        self.segment = segment
        self.candidates = candidates


class AmbiguousSegment(ResolutionException):
    code = "E201"
    severity = "error"


class TransientException(MegalException):
    code = "W202"
    severity = "warning"


class CommandFailed(TransientException):
    def __init__(self, message: str, exit_code: int | None = None, stderr: str = ""):
        super().__init__(message)
        self.exit_code = exit_code
        self.stderr = stderr


class CaptureTimeout(TransientException):
    pass


class CaptureFileMissing(TransientException):
    pass


# ---------- inference ----------

class FixedPointNotReached(MegalException):
    code = "I002"

    def __init__(self, max_rounds: int):
        super().__init__(f"no fixed point after {max_rounds} rounds")
        self.max_rounds = max_rounds


class InferrerFault(MegalException):
    code = "I001"
    severity = "warning"


# ---------- evaluation ----------

class EvaluatorFault(MegalException):
    code = "V001"
    severity = "warning"


class ProtocolError(MegalException):
    code = "V002"
    severity = "warning"


class PluginTimeout(MegalException):
    code = "V003"
    severity = "warning"


# ---------- trace / cli ----------

class NoSuchStatement(MegalException):
    code = "T001"


class UnsupportedFormat(MegalException):
    code = "C002"
