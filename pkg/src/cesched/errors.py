from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence


@dataclass(frozen=True)
class Diagnostic:
    path: str
    line: int
    col: int
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}: {self.severity}: {self.message}"


class CesError(Exception):
    """Base class for all errors raised by this package."""


class CompileError(CesError):
    """One or more diagnostics against a source file."""

    kind = "error"

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class LexError(CompileError):
    kind = "lexical error"


class ParseError(CompileError):
    kind = "syntax error"


class ValidationError(CompileError):
    kind = "validation error"


class ConfigError(CesError):
    """Bad machine configuration or run configuration."""


class PlanError(CesError):
    """A plan does not match the program it is applied to."""


class InvariantViolation(CesError):
    """An internal consistency check failed."""
