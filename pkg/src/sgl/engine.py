"""End-to-end orchestration: statement text in, SVG out."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .analyzer import analyze
from .ast import SglStatement, source_key
from .datasource import Database, TableSchema
from .diagnostics import Diagnostic
from .lexer import end_position, tokenize
from .parser import parse
from .pipeline import ExecOptions, ExecutionResult, execute
from .renderer import RenderConfig, render


@dataclass
class RunResult:
    svg: str
    warnings: list[Diagnostic]
    timing_ms: float


class SglEngine:
    """Wires the lexer, parser, analyzer, pipeline and renderer together."""

    def __init__(
        self,
        db: Database | None = None,
        config: RenderConfig | None = None,
        options: ExecOptions | None = None,
    ):
        self.db = db or Database()
        self.config = config or RenderConfig()
        self.options = options or ExecOptions()

    def resolve_schemas(self, stmt: SglStatement) -> dict[str, TableSchema]:
        schemas: dict[str, TableSchema] = {}
        for layer in stmt.layers:
            key = source_key(layer.source)
            if key not in schemas:
                schemas[key] = self.db.schema_of(layer.source)
        return schemas

    def execute_text(self, text: str, seed: int | None = None) -> ExecutionResult:
        """Lex, parse, analyze and execute; raises SglError with diagnostics."""
        stmt = parse(tokenize(text), end_position(text))
        schemas = self.resolve_schemas(stmt)
        graphic = analyze(stmt, schemas)
        options = self.options if seed is None else replace(self.options, seed=seed)
        return execute(graphic, self.db, options)

    def run(
        self,
        text: str,
        seed: int | None = None,
        width: int | None = None,
        height: int | None = None,
        parallel: bool = False,
    ) -> RunResult:
        started = time.perf_counter()
        result = self.execute_text(text, seed)
        config = self.config
        if width is not None or height is not None:
            config = replace(
                config,
                width=width if width is not None else config.width,
                height=height if height is not None else config.height,
            )
        svg = render(result.grid, result.scales, result.coord, config, parallel=parallel)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        return RunResult(svg=svg, warnings=result.warnings, timing_ms=elapsed_ms)
