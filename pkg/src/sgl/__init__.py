"""SGL: a SQL-styled graphics language with an embedded SQL backend and SVG output."""

__version__ = "0.1.0"

from .analyzer import ResolvedGraphic, ScaleDef, analyze
from .datasource import ColumnTable, Database, TableSchema
from .diagnostics import Diagnostic, SglError
from .engine import RunResult, SglEngine
from .lexer import Token, TokenKind, tokenize
from .parser import parse, parse_text, unparse
from .pipeline import ExecOptions, ExecutionResult, PanelGrid, execute
from .renderer import RenderConfig, compute_ticks, render

__all__ = [
    "ColumnTable",
    "Database",
    "Diagnostic",
    "ExecOptions",
    "ExecutionResult",
    "PanelGrid",
    "RenderConfig",
    "ResolvedGraphic",
    "RunResult",
    "ScaleDef",
    "SglEngine",
    "SglError",
    "TableSchema",
    "Token",
    "TokenKind",
    "analyze",
    "compute_ticks",
    "execute",
    "parse",
    "parse_text",
    "render",
    "tokenize",
    "unparse",
    "__version__",
]
