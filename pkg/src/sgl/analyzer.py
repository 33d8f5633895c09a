"""Semantic analysis: validate a parsed statement and build the resolved IR.

The resolved graphic has a single coordinate system, one scale per mapped
aesthetic shared by all layers, and one resolved layer per geom expression
(geom chains are expanded here).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    POSITIONAL_AESTHETICS,
    QUALIFIER_GEOMS,
    ColumnRef,
    DataSource,
    Expr,
    FacetSpec,
    FuncCall,
    LayerSpec,
    NumberLit,
    SglStatement,
    StringLit,
    column_refs,
    expr_text,
    is_aggregate,
    source_key,
)
from .datasource import TableSchema
from .diagnostics import Diagnostic, SglError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

GEOM_CLASS = {"point": "individual", "bar": "individual", "line": "collective"}


@dataclass
class ScaleDef:
    """One scale per mapped aesthetic; domain stays unset until execution."""

    aesthetic: str
    kind: str  # linear | log10 | discrete
    title: str
    domain: tuple[float, float] | None = None
    categories: list | None = None


@dataclass
class ResolvedLayer:
    index: int
    source: DataSource
    mappings: dict[str, Expr]
    pre_aesthetics: tuple[str, ...]  # aesthetics mapped to non-aggregate exprs
    agg_aesthetics: tuple[str, ...]  # aesthetics mapped to aggregate calls
    groupings: tuple[Expr, ...]
    collections: tuple[Expr, ...] | None  # None means default collection
    geom: str
    qualifier: str | None
    geom_class: str

    @property
    def aggregated(self) -> bool:
        return bool(self.agg_aesthetics) or bool(self.groupings)


@dataclass
class ResolvedFacet:
    row_expr: Expr | None = None
    col_expr: Expr | None = None


@dataclass
class ResolvedGraphic:
    coord: str  # cartesian | polar
    scales: dict[str, ScaleDef]
    layers: list[ResolvedLayer]
    facet: ResolvedFacet | None = None
    warnings: list[Diagnostic] = field(default_factory=list)


def _diag(code: str, message: str, pos) -> Diagnostic:
    return Diagnostic(code, message, pos.line, pos.col)


def expr_type(expr: Expr, schema: TableSchema) -> str:
    """numeric vs categorical; bin() and aggregates always count as numeric."""
    if isinstance(expr, ColumnRef):
        col_type = schema.column_type(expr.name)
        return CATEGORICAL if col_type == "text" else NUMERIC
    if isinstance(expr, FuncCall):
        return NUMERIC
    if isinstance(expr, NumberLit):
        return NUMERIC
    if isinstance(expr, StringLit):
        return CATEGORICAL
    return NUMERIC


def infer_coord(layer_mappings: list[dict[str, Expr]]) -> str:
    """Polar iff any layer maps theta or r; assumes coordinate mix was rejected."""
    for mappings in layer_mappings:
        if "theta" in mappings or "r" in mappings:
            return "polar"
    return "cartesian"


def _mapping_types(
    stmt: SglStatement, schemas: dict[str, TableSchema], errors: list[Diagnostic],
) -> dict[str, str]:
    """Unified per-aesthetic type across layers, recording conflicts."""
    types: dict[str, str] = {}
    first_pos: dict[str, object] = {}
    for layer in stmt.layers:
        schema = schemas.get(source_key(layer.source))
        if schema is None:
            continue
        for m in layer.mappings:
            if any(ref.name.lower() not in schema.column_names_lower for ref in column_refs(m.expr)):
                continue  # unknown column reported elsewhere
            t = expr_type(m.expr, schema)
            if m.aesthetic not in types:
                types[m.aesthetic] = t
                first_pos[m.aesthetic] = m.pos
            elif types[m.aesthetic] != t:
                errors.append(_diag(
                    "E_TYPE_CONFLICT",
                    f"aesthetic '{m.aesthetic}' is mapped to a "
                    f"{'numeric' if t == NUMERIC else 'categorical'} expression here but a "
                    f"{'numeric' if types[m.aesthetic] == NUMERIC else 'categorical'} one in an earlier layer",
                    m.pos,
                ))
    return types


def resolve_scales(
    stmt: SglStatement,
    mapping_types: dict[str, str],
    errors: list[Diagnostic],
) -> dict[str, ScaleDef]:
    """One ScaleDef per mapped aesthetic: kind from types + scale by, title from exprs."""
    titles: dict[str, str] = {}
    for layer in stmt.layers:
        for m in layer.mappings:
            titles.setdefault(m.aesthetic, expr_text(m.expr))

    log_aesthetics: set[str] = set()
    for spec in stmt.scale_specs:
        if spec.aesthetic not in mapping_types:
            errors.append(_diag(
                "E_SCALE_UNMAPPED",
                f"scale by names aesthetic '{spec.aesthetic}' but no layer maps it",
                spec.pos,
            ))
            continue
        if mapping_types[spec.aesthetic] == CATEGORICAL:
            errors.append(_diag(
                "E_SCALE_ON_DISCRETE",
                f"log scale cannot apply to '{spec.aesthetic}': it is mapped to a categorical expression",
                spec.pos,
            ))
            continue
        log_aesthetics.add(spec.aesthetic)

    scales: dict[str, ScaleDef] = {}
    for aesthetic, t in mapping_types.items():
        if t == CATEGORICAL:
            kind = "discrete"
        elif aesthetic in log_aesthetics:
            kind = "log10"
        else:
            kind = "linear"
        scales[aesthetic] = ScaleDef(aesthetic, kind, titles[aesthetic])

    seen_titles: set[str] = set()
    for t in stmt.title_specs:
        if t.aesthetic not in scales:
            errors.append(_diag(
                "E_TITLE_UNMAPPED",
                f"title names aesthetic '{t.aesthetic}' but no layer maps it",
                t.pos,
            ))
            continue
        if t.aesthetic in seen_titles:
            errors.append(_diag(
                "E_TITLE_DUPLICATE", f"aesthetic '{t.aesthetic}' is titled more than once", t.pos,
            ))
            continue
        seen_titles.add(t.aesthetic)
        scales[t.aesthetic].title = t.title
    return scales


def _check_columns(layer: LayerSpec, facet: FacetSpec | None, schema: TableSchema, errors: list[Diagnostic]) -> None:
    checked: list[tuple[Expr, str]] = [(m.expr, "visualize") for m in layer.mappings]
    checked += [(e, "group by") for e in layer.group_by]
    checked += [(e, "collect by") for e in layer.collect_by]
    if facet is not None:
        checked += [(e, "facet by") for e in facet.exprs]
    for expr, clause in checked:
        for ref in column_refs(expr):
            if ref.name.lower() not in schema.column_names_lower:
                errors.append(_diag(
                    "E_UNKNOWN_COLUMN",
                    f"column '{ref.name}' ({clause}) does not exist in {schema.describe()}",
                    ref.pos,
                ))


def _check_clause_exprs(layer: LayerSpec, facet: FacetSpec | None, errors: list[Diagnostic]) -> None:
    clauses = [("group by", layer.group_by), ("collect by", layer.collect_by)]
    if facet is not None:
        clauses.append(("facet by", facet.exprs))
    for clause, exprs in clauses:
        for e in exprs:
            if is_aggregate(e):
                errors.append(_diag(
                    "E_BAD_CLAUSE_EXPR",
                    f"aggregate '{expr_text(e)}' is not allowed in '{clause}'",
                    e.pos,
                ))


def _check_group_completeness(layer: LayerSpec, errors: list[Diagnostic]) -> None:
    has_agg = any(is_aggregate(m.expr) for m in layer.mappings)
    if not has_agg and not layer.group_by:
        return
    groupings = list(layer.group_by)
    for m in layer.mappings:
        if not is_aggregate(m.expr) and m.expr not in groupings:
            errors.append(_diag(
                "E_GROUPBY_INCOMPLETE",
                f"non-aggregated expression '{expr_text(m.expr)}' must appear in group by",
                m.pos,
            ))
    for e in layer.collect_by:
        if e not in groupings:
            errors.append(_diag(
                "E_GROUPBY_INCOMPLETE",
                f"collect by expression '{expr_text(e)}' must appear in group by when aggregating",
                e.pos,
            ))


def _check_coordinates(stmt: SglStatement, errors: list[Diagnostic]) -> None:
    cartesian_pos = polar_pos = None
    any_positional = False
    for layer in stmt.layers:
        for m in layer.mappings:
            if m.aesthetic in ("x", "y") and cartesian_pos is None:
                cartesian_pos = m.pos
            if m.aesthetic in ("theta", "r") and polar_pos is None:
                polar_pos = m.pos
            if m.aesthetic in POSITIONAL_AESTHETICS:
                any_positional = True
    if cartesian_pos is not None and polar_pos is not None:
        errors.append(_diag(
            "E_COORD_MIX",
            "a graphic cannot mix x/y with theta/r: all layers must share one coordinate system",
            polar_pos,
        ))
    if not any_positional:
        pos = stmt.layers[0].mappings[0].pos if stmt.layers[0].mappings else stmt.layers[0].pos
        errors.append(_diag(
            "E_NO_POSITION",
            "no positional aesthetic (x, y, theta, r) is mapped in any layer",
            pos,
        ))


def _check_facet(facet: FacetSpec | None, errors: list[Diagnostic]) -> None:
    if facet is None:
        return
    if len(facet.exprs) > 2:
        errors.append(_diag(
            "E_FACET_ARITY", f"facet by accepts at most two expressions, got {len(facet.exprs)}", facet.pos,
        ))
    elif len(facet.exprs) == 2 and facet.orientation is not None:
        errors.append(_diag(
            "E_FACET_ARITY", "an orientation keyword is only valid with a single facet expression", facet.pos,
        ))


def _resolve_facet(facet: FacetSpec | None) -> ResolvedFacet | None:
    if facet is None:
        return None
    if len(facet.exprs) == 2:
        return ResolvedFacet(row_expr=facet.exprs[0], col_expr=facet.exprs[1])
    if facet.orientation == "vertical":
        return ResolvedFacet(row_expr=facet.exprs[0])
    return ResolvedFacet(col_expr=facet.exprs[0])


def analyze(stmt: SglStatement, schemas: dict[str, TableSchema]) -> ResolvedGraphic:
    """Validate `stmt` against the schemas and produce the resolved IR.

    `schemas` maps source_key(source) -> TableSchema for every source in the
    statement (the caller resolves subquery schemas through the backend).
    Raises SglError carrying every error diagnostic found.
    """
    errors: list[Diagnostic] = []
    warnings: list[Diagnostic] = []

    for layer in stmt.layers:
        key = source_key(layer.source)
        schema = schemas.get(key)
        if schema is None:
            name = layer.source.name if hasattr(layer.source, "name") else "subquery"
            errors.append(_diag("E_NO_TABLE", f"no schema available for source '{name}'", layer.source.pos))
            continue
        _check_columns(layer, stmt.facet_spec, schema, errors)
        _check_clause_exprs(layer, stmt.facet_spec, errors)
        _check_group_completeness(layer, errors)
        for g in layer.geom_chain:
            if g.qualifier is not None and QUALIFIER_GEOMS[g.qualifier] != g.geom:
                errors.append(_diag(
                    "E_BAD_QUALIFIER",
                    f"qualifier '{g.qualifier}' requires the "
                    f"{QUALIFIER_GEOMS[g.qualifier]} geom, not {g.geom}",
                    g.pos,
                ))

    _check_coordinates(stmt, errors)
    _check_facet(stmt.facet_spec, errors)

    mapping_types = _mapping_types(stmt, schemas, errors)
    for layer in stmt.layers:
        for m in layer.mappings:
            if m.aesthetic == "color" and mapping_types.get("color") == NUMERIC:
                errors.append(_diag(
                    "E_TYPE_UNSUPPORTED",
                    "color must map to a categorical expression; continuous color scales are not supported",
                    m.pos,
                ))
                mapping_types["color"] = CATEGORICAL  # report once
                break

    scales = resolve_scales(stmt, mapping_types, errors)

    if errors:
        raise SglError(errors)

    resolved_layers: list[ResolvedLayer] = []
    for layer in stmt.layers:
        mappings = {m.aesthetic: m.expr for m in layer.mappings}
        pre = tuple(m.aesthetic for m in layer.mappings if not is_aggregate(m.expr))
        agg = tuple(m.aesthetic for m in layer.mappings if is_aggregate(m.expr))
        for g in layer.geom_chain:
            resolved_layers.append(ResolvedLayer(
                index=len(resolved_layers),
                source=layer.source,
                mappings=mappings,
                pre_aesthetics=pre,
                agg_aesthetics=agg,
                groupings=layer.group_by,
                collections=layer.collect_by if layer.collect_by else None,
                geom=g.geom,
                qualifier=g.qualifier,
                geom_class=GEOM_CLASS[g.geom],
            ))

    coord = infer_coord([dict(l.mappings) for l in resolved_layers])
    return ResolvedGraphic(
        coord=coord,
        scales=scales,
        layers=resolved_layers,
        facet=_resolve_facet(stmt.facet_spec),
        warnings=warnings,
    )
