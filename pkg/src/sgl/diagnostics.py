"""Diagnostics: positioned errors and warnings shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """An error or warning anchored to a source position.

    Field names (code, message, line, col, length, severity) are a stable
    contract for the HTTP service and the browser console.
    """

    code: str
    message: str
    line: int = 1
    col: int = 1
    length: int = 1
    severity: str = "error"

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "col": self.col,
            "length": self.length,
            "severity": self.severity,
        }

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.code} {self.message}"


def warning(code: str, message: str, line: int = 1, col: int = 1, length: int = 1) -> Diagnostic:
    return Diagnostic(code, message, line, col, length, severity="warning")


class SglError(Exception):
    """Raised by any stage; carries one or more error diagnostics."""

    def __init__(self, diagnostics: Diagnostic | list[Diagnostic]):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics: list[Diagnostic] = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))

    @property
    def first(self) -> Diagnostic:
        return self.diagnostics[0]
