"""AST node types for SGL statements.

Source positions ride along on every node but are excluded from equality so
that parse(unparse(x)) compares structurally equal to x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

AESTHETICS = ("x", "y", "theta", "r", "color")
POSITIONAL_AESTHETICS = ("x", "y", "theta", "r")
GEOMS = ("point", "bar", "line")
QUALIFIERS = ("regression", "jittered", "unstacked", "stacked")
AGGREGATE_FUNCS = ("count", "mean", "sum", "min", "max")
TRANSFORM_FUNCS = ("bin",)
FUNC_NAMES = TRANSFORM_FUNCS + AGGREGATE_FUNCS

# qualifier -> the single geom it applies to
QUALIFIER_GEOMS = {
    "regression": "line",
    "jittered": "point",
    "unstacked": "bar",
    "stacked": "bar",
}


@dataclass(frozen=True)
class Pos:
    line: int = 1
    col: int = 1


def _pos_field() -> Pos:
    return field(default=Pos(), compare=False)  # type: ignore[return-value]


@dataclass(frozen=True)
class ColumnRef:
    name: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class FuncCall:
    name: str  # one of FUNC_NAMES, lowercased
    args: tuple["Expr", ...]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Star:
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class NumberLit:
    value: float
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class StringLit:
    value: str
    pos: Pos = _pos_field()


Expr = Union[ColumnRef, FuncCall, Star, NumberLit, StringLit]


def expr_text(expr: Expr) -> str:
    """Canonical text of an expression (scale titles, error messages)."""
    if isinstance(expr, ColumnRef):
        return expr.name
    if isinstance(expr, FuncCall):
        return f"{expr.name}({', '.join(expr_text(a) for a in expr.args)})"
    if isinstance(expr, Star):
        return "*"
    if isinstance(expr, NumberLit):
        v = expr.value
        return str(int(v)) if float(v).is_integer() else str(v)
    if isinstance(expr, StringLit):
        return "'" + expr.value.replace("'", "''") + "'"
    raise TypeError(f"not an expression: {expr!r}")


def is_aggregate(expr: Expr) -> bool:
    return isinstance(expr, FuncCall) and expr.name in AGGREGATE_FUNCS


def column_refs(expr: Expr) -> list[ColumnRef]:
    if isinstance(expr, ColumnRef):
        return [expr]
    if isinstance(expr, FuncCall):
        return [r for a in expr.args for r in column_refs(a)]
    return []


@dataclass(frozen=True)
class TableRef:
    name: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Subquery:
    sql: str
    pos: Pos = _pos_field()


DataSource = Union[TableRef, Subquery]


def source_key(source: DataSource) -> str:
    """Stable lookup key for a data source (schema map, fetch cache)."""
    if isinstance(source, TableRef):
        return "table:" + source.name.lower()
    return "sql:" + source.sql


@dataclass(frozen=True)
class AestheticMapping:
    expr: Expr
    aesthetic: str  # one of AESTHETICS
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class GeomExpr:
    geom: str  # singular form
    qualifier: str | None = None
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class LayerSpec:
    mappings: tuple[AestheticMapping, ...]
    source: DataSource
    group_by: tuple[Expr, ...] = ()
    collect_by: tuple[Expr, ...] = ()
    geom_chain: tuple[GeomExpr, ...] = ()
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ScaleSpec:
    transform: str  # currently always "log"
    aesthetic: str  # positional aesthetic
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class FacetSpec:
    exprs: tuple[Expr, ...]
    orientation: str | None = None  # "horizontal" | "vertical" | None (defaulted)
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class TitleSpec:
    aesthetic: str
    title: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SglStatement:
    layers: tuple[LayerSpec, ...]
    scale_specs: tuple[ScaleSpec, ...] = ()
    facet_spec: FacetSpec | None = None
    title_specs: tuple[TitleSpec, ...] = ()
