"""Execution pipeline: fetch, map, scale, bin, aggregate, qualify, collect,
stack and facet a resolved graphic into per-panel mark sets.

Stage order per layer: fetch -> map aesthetics -> scale transforms -> bin
materialization (edges global across panels) -> facet partition -> aggregate
per groupings -> qualifier transform -> collection assembly -> stacking.
All ordering is deterministic so repeated runs are byte-identical.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field, replace

from .analyzer import ResolvedGraphic, ResolvedLayer, ScaleDef
from .ast import (
    ColumnRef,
    Expr,
    FuncCall,
    NumberLit,
    Star,
    StringLit,
    expr_text,
    source_key,
)
from .datasource import ColumnTable, Database
from .diagnostics import Diagnostic, SglError, warning

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ExecOptions:
    seed: int = 0
    bin_count: int = 10
    facet_cap: int = 64


@dataclass(frozen=True)
class BinDef:
    """Equal-width bin edges in scaled space; intervals are right-open except the last."""

    edges: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.edges) - 1

    @property
    def width(self) -> float:
        return (self.edges[-1] - self.edges[0]) / self.count

    def midpoint(self, index: int) -> float:
        return (self.edges[index] + self.edges[index + 1]) / 2.0

    @property
    def degenerate(self) -> bool:
        return self.edges[0] == self.edges[-1]


# -- marks --------------------------------------------------------------------


@dataclass(frozen=True)
class PointMark:
    """Scaled-space point; in polar coordinates x carries theta and y carries r."""

    x: float
    y: float
    color: str | None = None


@dataclass(frozen=True)
class SegmentMark:
    x0: float
    y0: float
    x1: float
    y1: float
    color: str | None = None


@dataclass(frozen=True)
class RectMark:
    x_center: float
    width: float
    y0: float
    y1: float
    color: str | None = None


@dataclass(frozen=True)
class WedgeMark:
    """Angles in radians, 0 at 12 o'clock proceeding clockwise."""

    theta0: float
    theta1: float
    r0: float | None = None
    r1: float | None = None
    color: str | None = None


Mark = PointMark | SegmentMark | RectMark | WedgeMark


@dataclass
class MarkSet:
    layer_index: int
    geom: str
    marks: list[Mark] = field(default_factory=list)


@dataclass
class PanelGrid:
    """Facet panels; a [None] label list means the axis is unfaceted."""

    row_labels: list
    col_labels: list
    panels: dict[tuple[int, int], list[MarkSet]]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_labels), len(self.col_labels)

    def marksets(self) -> list[MarkSet]:
        ordered = []
        for ri in range(len(self.row_labels)):
            for ci in range(len(self.col_labels)):
                ordered.extend(self.panels[(ri, ci)])
        return ordered

    def mark_count(self) -> int:
        return sum(len(ms.marks) for ms in self.marksets())


@dataclass
class AestheticFrame:
    """Columnar frame keyed by aesthetic / auxiliary column names."""

    columns: dict[str, list]
    nrows: int

    @property
    def n(self) -> int:
        return self.nrows


@dataclass
class ExecutionResult:
    grid: PanelGrid
    scales: dict[str, ScaleDef]
    coord: str
    warnings: list[Diagnostic]


# -- elementary operations ----------------------------------------------------


def apply_scale(values: list, kind: str) -> tuple[list, int]:
    """Transform a numeric column; log10 marks nonpositive cells None and counts them."""
    if kind != "log10":
        return list(values), 0
    out: list = []
    dropped = 0
    for v in values:
        if v is None:
            out.append(None)
        elif v <= 0:
            out.append(None)
            dropped += 1
        else:
            out.append(math.log10(v))
    return out, dropped


def bin_values(values: list[float], bin_count: int = 10) -> tuple[BinDef, list[int]]:
    """Equal-width bins over [min, max]; returns per-row bin indices."""
    if not values:
        raise SglError(Diagnostic("E_EMPTY_INPUT", "cannot bin an empty column"))
    lo = min(values)
    hi = max(values)
    if lo == hi:
        return BinDef((lo, hi)), [0] * len(values)
    # pin both ends so min and max always fall inside the outer bins
    edges = tuple(
        lo + (hi - lo) * i / bin_count if 0 < i < bin_count else (lo if i == 0 else hi)
        for i in range(bin_count + 1)
    )
    indices = []
    for v in values:
        idx = bisect_right(edges, v) - 1
        indices.append(min(max(idx, 0), bin_count - 1))
    return BinDef(edges), indices


def aggregate(frame: AestheticFrame, groupings: list[str], aggs: dict[str, tuple[str, str | None]]) -> AestheticFrame:
    """Collapse to one row per distinct grouping tuple, ordered ascending.

    `aggs` maps output column -> (func, argument column or None for count(*)).
    Aggregates skip nulls themselves; count(*) is the group size. Non-aggregate
    columns carry the first row of each group (they are constant within one).
    """
    groups: dict[tuple, list[int]] = {}
    for i in range(frame.n):
        key = tuple(frame.columns[g][i] for g in groupings)
        groups.setdefault(key, []).append(i)
    order = sorted(groups, key=_tuple_sort_key)

    out: dict[str, list] = {name: [] for name in frame.columns if name not in aggs}
    for name in aggs:
        out[name] = []
    for key in order:
        idxs = groups[key]
        first = idxs[0]
        for name in frame.columns:
            if name in aggs:
                continue
            out[name].append(frame.columns[name][first])
        for name, (func, arg) in aggs.items():
            arg_values = None if arg is None else [frame.columns[arg][i] for i in idxs]
            out[name].append(_aggregate_value(func, arg_values, len(idxs)))
    return AestheticFrame(out, len(order))


def _aggregate_value(func: str, arg_values: list | None, group_size: int):
    if func == "count":
        if arg_values is None:
            return group_size
        return sum(1 for v in arg_values if v is not None)
    present = [v for v in arg_values or [] if not _is_missing(v)]
    if not present:
        return None
    if func == "mean":
        return math.fsum(present) / len(present)
    if func == "sum":
        return math.fsum(present)
    if func == "min":
        return min(present)
    if func == "max":
        return max(present)
    raise ValueError(f"unknown aggregate {func!r}")


def _is_missing(v) -> bool:
    """Nulls and non-finite numerics are excluded from the pipeline alike."""
    if v is None:
        return True
    return isinstance(v, float) and not math.isfinite(v)


def _value_sort_key(v):
    if v is None:
        return (2, 0.0, "")
    if isinstance(v, (int, float)):
        return (0, float(v), "")
    return (1, 0.0, str(v))


def _tuple_sort_key(key: tuple):
    return tuple(_value_sort_key(v) for v in key)


def collect(frame: AestheticFrame, collect_keys: list[str] | None, order_by: str | None) -> list[tuple[tuple, list[int]]]:
    """Partition post-CTA rows into collections, each one geometric object.

    Explicit keys partition by their value tuples; the default is one
    collection per color category (when color is present) or a single
    collection. Rows inside a collection are ordered by `order_by` ascending.
    """
    if collect_keys is None:
        collect_keys = ["color"] if "color" in frame.columns else []
    groups: dict[tuple, list[int]] = {}
    for i in range(frame.n):
        key = tuple(frame.columns[k][i] for k in collect_keys)
        groups.setdefault(key, []).append(i)
    result = []
    for key in sorted(groups, key=_tuple_sort_key):
        idxs = groups[key]
        if order_by is not None and order_by in frame.columns:
            col = frame.columns[order_by]
            idxs = sorted(idxs, key=lambda i: _value_sort_key(col[i]))
        result.append((key, idxs))
    return result


def fit_line(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Ordinary least squares of y on x; returns (slope, intercept)."""
    if len(set(xs)) < 2:
        raise SglError(Diagnostic(
            "E_REGRESSION_UNDERDETERMINED",
            "regression needs at least two distinct x values in a collection",
        ))
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, my - slope * mx


def jitter_width(xs: list[float], discrete: bool) -> float:
    """0.4 of the minimum spacing between distinct positions (0.4 units on
    discrete axes or when fewer than two distinct positions exist)."""
    if discrete:
        return 0.4
    distinct = sorted(set(xs))
    if len(distinct) < 2:
        return 0.4
    spacing = min(b - a for a, b in zip(distinct, distinct[1:]))
    return 0.4 * spacing


def jitter_values(xs: list[float], width: float, rng: random.Random) -> list[float]:
    return [x + rng.uniform(-width / 2.0, width / 2.0) for x in xs]


def stack(
    positions: list,
    values: list[float],
    colors: list,
    color_order: list,
    unstacked: bool = False,
    polar: bool = False,
) -> list[tuple[object, float, float, object]]:
    """Stack bar segments into (position, v0, v1, color) tuples.

    Within each position, segments stack from 0 in ascending color-category
    order. In polar mode cumulative values are rescaled so each position's
    total spans [0, 2*pi].
    """
    by_pos: dict = {}
    for i, pos in enumerate(positions):
        by_pos.setdefault(pos, []).append(i)

    color_rank = {c: k for k, c in enumerate(color_order)}
    out: list[tuple[object, float, float, object]] = []
    for pos in sorted(by_pos, key=_value_sort_key):
        idxs = sorted(by_pos[pos], key=lambda i: (color_rank.get(colors[i], len(color_rank)), i))
        if not unstacked:
            for i in idxs:
                if values[i] is not None and values[i] < 0:
                    raise SglError(Diagnostic(
                        "E_NEGATIVE_STACK", "cannot stack negative segment heights",
                    ))
        total = math.fsum(v for i in idxs if (v := values[i]) is not None)
        cumulative = 0.0
        for i in idxs:
            v = values[i]
            if v is None:
                continue
            if unstacked:
                v0, v1 = 0.0, v
            else:
                v0, v1 = cumulative, cumulative + v
                cumulative = v1
            if polar:
                if total <= 0:
                    continue
                v0, v1 = TWO_PI * v0 / total, TWO_PI * v1 / total
            lo, hi = (v0, v1) if v0 <= v1 else (v1, v0)
            out.append((pos, lo, hi, colors[i]))
    return out


def panel_layout(
    row_values: list | None, col_values: list | None, cap: int = 64,
) -> tuple[list, list]:
    """Sorted unique row/col keys for the facet grid; [None] for an unfaceted axis."""
    rows = sorted(set(row_values), key=_value_sort_key) if row_values is not None else [None]
    cols = sorted(set(col_values), key=_value_sort_key) if col_values is not None else [None]
    if len(rows) * len(cols) > cap:
        raise SglError(Diagnostic(
            "E_FACET_CARDINALITY",
            f"faceting would create {len(rows) * len(cols)} panels (cap {cap})",
        ))
    return rows, cols


def format_facet_label(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


# -- layer evaluation ---------------------------------------------------------


class _Column:
    """A materialized pre-aggregate expression column for one layer."""

    def __init__(self, expr: Expr, values: list, binned: bool):
        self.expr = expr
        self.values = values       # raw, then scaled / index-converted in place
        self.binned = binned
        self.bin_def: BinDef | None = None
        self.bin_indices: list[int] | None = None
        self.midpoints: list[float] | None = None

    def key_values(self) -> list:
        return self.bin_indices if self.binned else self.values

    def position_values(self) -> list:
        return self.midpoints if self.binned else self.values


class _LayerData:
    """All materialized columns for one resolved layer."""

    def __init__(self, layer: ResolvedLayer):
        self.layer = layer
        self.aes_cols: dict[str, _Column] = {}        # one column per mapped pre-aesthetic
        self.aux_cols: dict[str, _Column] = {}        # keyed by expr text
        self.agg_args: dict[str, tuple[str, list | None]] = {}
        self.facet_cols: list[_Column] = []
        self.n = 0

    def expr_column(self, expr: Expr) -> _Column:
        """Column for a grouping/collection/facet expr, aliasing a mapping when equal."""
        text = expr_text(expr)
        for aesthetic in self.layer.pre_aesthetics:
            if expr_text(self.layer.mappings[aesthetic]) == text:
                return self.aes_cols[aesthetic]
        return self.aux_cols[text]

    def unique_columns(self) -> list[_Column]:
        seen: set[int] = set()
        out: list[_Column] = []
        for col in list(self.aes_cols.values()) + list(self.aux_cols.values()):
            if id(col) not in seen:
                seen.add(id(col))
                out.append(col)
        return out


def _evaluate_expr(expr: Expr, table: ColumnTable, n: int) -> tuple[list, bool]:
    """Raw values for a pre-aggregate expression; True when it is a bin()."""
    if isinstance(expr, ColumnRef):
        return list(table.column(expr.name)), False
    if isinstance(expr, FuncCall) and expr.name == "bin":
        inner = expr.args[0]
        assert isinstance(inner, ColumnRef)
        return list(table.column(inner.name)), True
    if isinstance(expr, NumberLit):
        return [expr.value] * n, False
    if isinstance(expr, StringLit):
        return [expr.value] * n, False
    raise ValueError(f"not a pre-aggregate expression: {expr_text(expr)}")


def _build_layer_data(
    layer: ResolvedLayer,
    table: ColumnTable,
    graphic: ResolvedGraphic,
    options: ExecOptions,
    warnings_out: list[Diagnostic],
) -> _LayerData:
    data = _LayerData(layer)
    n = table.row_count

    for aesthetic in layer.pre_aesthetics:
        values, binned = _evaluate_expr(layer.mappings[aesthetic], table, n)
        data.aes_cols[aesthetic] = _Column(layer.mappings[aesthetic], values, binned)

    facet_exprs: list[Expr] = []
    if graphic.facet is not None:
        facet_exprs = [e for e in (graphic.facet.row_expr, graphic.facet.col_expr) if e is not None]
    mapped_texts = {expr_text(layer.mappings[a]) for a in layer.pre_aesthetics}
    for expr in list(layer.groupings) + list(layer.collections or ()) + facet_exprs:
        text = expr_text(expr)
        if text in mapped_texts or text in data.aux_cols:
            continue
        values, binned = _evaluate_expr(expr, table, n)
        data.aux_cols[text] = _Column(expr, values, binned)

    for aesthetic in layer.agg_aesthetics:
        call = layer.mappings[aesthetic]
        assert isinstance(call, FuncCall)
        arg = call.args[0]
        if isinstance(arg, Star):
            data.agg_args[aesthetic] = (call.name, None)
        else:
            assert isinstance(arg, ColumnRef)
            data.agg_args[aesthetic] = (call.name, list(table.column(arg.name)))

    # drop rows with nulls (or non-finite numerics) in any key/positional column
    keep = [True] * n
    for col in data.unique_columns():
        for i, v in enumerate(col.values):
            if _is_missing(v):
                keep[i] = False
    null_dropped = keep.count(False)
    if null_dropped:
        warnings_out.append(warning(
            "W_NULL_DROPPED",
            f"dropped {null_dropped} row(s) with null values in mapped columns",
            layer.source.pos.line, layer.source.pos.col,
        ))

    # scale transforms on mapped columns and on aggregate arguments
    log_dropped = 0
    for aesthetic in layer.pre_aesthetics:
        if graphic.scales[aesthetic].kind != "log10":
            continue
        col = data.aes_cols[aesthetic]
        scaled, _ = apply_scale(col.values, "log10")
        for i, v in enumerate(scaled):
            if v is None and col.values[i] is not None and keep[i]:
                keep[i] = False
                log_dropped += 1
        col.values = scaled
    for aesthetic, (func, arg_values) in list(data.agg_args.items()):
        if graphic.scales[aesthetic].kind != "log10" or func == "count" or arg_values is None:
            continue
        scaled, _ = apply_scale(arg_values, "log10")
        for i, v in enumerate(scaled):
            if v is None and arg_values[i] is not None and keep[i]:
                keep[i] = False
                log_dropped += 1
        data.agg_args[aesthetic] = (func, scaled)
    if log_dropped:
        warnings_out.append(warning(
            "W_NONPOSITIVE_LOG",
            f"dropped {log_dropped} row(s) with non-positive values under a log scale",
            layer.source.pos.line, layer.source.pos.col,
        ))

    indices = [i for i in range(n) if keep[i]]
    for col in data.unique_columns():
        col.values = [col.values[i] for i in indices]
    for aesthetic, (func, arg_values) in list(data.agg_args.items()):
        if arg_values is not None:
            data.agg_args[aesthetic] = (func, [arg_values[i] for i in indices])
    data.n = len(indices)

    # materialize bins globally (edges shared across panels)
    if data.n:
        for col in data.unique_columns():
            if col.binned:
                bin_def, bin_idx = bin_values(col.values, options.bin_count)
                col.bin_def = bin_def
                col.bin_indices = bin_idx
                if bin_def.degenerate:
                    col.midpoints = [bin_def.edges[0]] * data.n
                else:
                    col.midpoints = [bin_def.midpoint(i) for i in bin_idx]

    data.facet_cols = [data.expr_column(e) for e in facet_exprs]
    return data


# -- execution ------------------------------------------------------------------


def execute(graphic: ResolvedGraphic, db: Database, options: ExecOptions | None = None) -> ExecutionResult:
    """Run a resolved graphic against the database, producing panelled marks."""
    options = options or ExecOptions()
    warnings_out: list[Diagnostic] = list(graphic.warnings)

    tables: dict[str, ColumnTable] = {}
    layer_data: list[_LayerData] = []
    for layer in graphic.layers:
        key = source_key(layer.source)
        if key not in tables:
            tables[key] = db.fetch(layer.source)
        layer_data.append(_build_layer_data(layer, tables[key], graphic, options, warnings_out))

    # global category lists for discrete scales (stable colors and positions)
    category_values: dict[str, set] = {}
    for data in layer_data:
        for aesthetic in data.layer.pre_aesthetics:
            if graphic.scales[aesthetic].kind == "discrete":
                category_values.setdefault(aesthetic, set()).update(data.aes_cols[aesthetic].values)
    categories = {a: sorted(vals, key=_value_sort_key) for a, vals in category_values.items()}

    # convert discrete positional columns to category indices
    for data in layer_data:
        for aesthetic in data.layer.pre_aesthetics:
            if aesthetic == "color" or graphic.scales[aesthetic].kind != "discrete":
                continue
            index_of = {v: float(i) for i, v in enumerate(categories.get(aesthetic, []))}
            col = data.aes_cols[aesthetic]
            col.values = [index_of[v] for v in col.values]

    # facet layout over all layers
    facet = graphic.facet
    if facet is not None:
        row_vals: list | None = [] if facet.row_expr is not None else None
        col_vals: list | None = [] if facet.col_expr is not None else None
        for data in layer_data:
            cols = list(data.facet_cols)
            if facet.row_expr is not None:
                row_vals.extend(cols.pop(0).key_values())
            if facet.col_expr is not None:
                col_vals.extend(cols.pop(0).key_values())
        row_keys, col_keys = panel_layout(row_vals, col_vals, options.facet_cap)
    else:
        row_keys, col_keys = [None], [None]

    grid = PanelGrid(
        row_labels=[format_facet_label(k) if k is not None else None for k in row_keys],
        col_labels=[format_facet_label(k) if k is not None else None for k in col_keys],
        panels={},
    )

    scales = {a: replace(s) for a, s in graphic.scales.items()}
    for aesthetic, cats in categories.items():
        scales[aesthetic].categories = cats

    domains: dict[str, list[float]] = {}
    for ri, row_key in enumerate(row_keys):
        for ci, col_key in enumerate(col_keys):
            panel_sets: list[MarkSet] = []
            for data in layer_data:
                marks = _panel_marks(
                    data, graphic, scales, options, row_key, col_key, (ri, ci),
                    warnings_out, domains,
                )
                panel_sets.append(MarkSet(data.layer.index, data.layer.geom, marks))
            grid.panels[(ri, ci)] = panel_sets

    for aesthetic, extent in domains.items():
        if aesthetic in scales and scales[aesthetic].kind != "discrete":
            scales[aesthetic].domain = (extent[0], extent[1])

    return ExecutionResult(grid=grid, scales=scales, coord=graphic.coord, warnings=warnings_out)


def _panel_rows(data: _LayerData, graphic: ResolvedGraphic, row_key, col_key) -> list[int]:
    facet = graphic.facet
    if facet is None:
        return list(range(data.n))
    cols = list(data.facet_cols)
    row_col = cols.pop(0).key_values() if facet.row_expr is not None else None
    col_col = cols.pop(0).key_values() if facet.col_expr is not None else None
    out = []
    for i in range(data.n):
        if row_col is not None and row_col[i] != row_key:
            continue
        if col_col is not None and col_col[i] != col_key:
            continue
        out.append(i)
    return out


def _post_cta_frame(
    data: _LayerData,
    graphic: ResolvedGraphic,
    rows: list[int],
    warnings_out: list[Diagnostic],
) -> AestheticFrame:
    """Apply aggregation for one panel, producing the post-CTA dataset."""
    layer = data.layer
    columns: dict[str, list] = {}
    for aesthetic in layer.pre_aesthetics:
        col = data.aes_cols[aesthetic]
        columns[aesthetic] = [col.position_values()[i] for i in rows]

    group_keys: list[str] = []
    if layer.aggregated:
        for gi, expr in enumerate(layer.groupings):
            col = data.expr_column(expr)
            name = f"__g{gi}"
            columns[name] = [col.key_values()[i] for i in rows]
            group_keys.append(name)

    collect_names: list[str] = []
    for cix, expr in enumerate(layer.collections or ()):
        col = data.expr_column(expr)
        name = f"__c{cix}"
        columns[name] = [col.key_values()[i] for i in rows]
        collect_names.append(name)

    frame = AestheticFrame(columns, len(rows))
    if not layer.aggregated:
        return frame

    aggs: dict[str, tuple[str, str | None]] = {}
    for aesthetic, (func, arg_values) in data.agg_args.items():
        if arg_values is None:
            aggs[aesthetic] = (func, None)
        else:
            name = f"__aggarg_{aesthetic}"
            frame.columns[name] = [arg_values[i] for i in rows]
            aggs[aesthetic] = (func, name)
    out = aggregate(frame, group_keys, aggs)
    for name in list(out.columns):
        if name.startswith("__aggarg_"):
            del out.columns[name]

    # post-aggregate log transform for counts; drop all-null aggregate rows
    drop: set[int] = set()
    for aesthetic, (func, _) in data.agg_args.items():
        scale = graphic.scales[aesthetic]
        if scale.kind == "log10" and func == "count":
            scaled, dropped = apply_scale(out.columns[aesthetic], "log10")
            if dropped:
                warnings_out.append(warning(
                    "W_NONPOSITIVE_LOG", f"dropped {dropped} zero-count group(s) under a log scale",
                ))
            out.columns[aesthetic] = scaled
        for i, v in enumerate(out.columns[aesthetic]):
            if _is_missing(v):
                drop.add(i)
    if drop:
        warnings_out.append(warning(
            "W_NULL_DROPPED", f"dropped {len(drop)} aggregate row(s) with null results",
        ))
        out.columns = {
            k: [v for i, v in enumerate(vals) if i not in drop] for k, vals in out.columns.items()
        }
        out.nrows -= len(drop)
    return out


def _rng_for(options: ExecOptions, layer_index: int, panel: tuple[int, int]) -> random.Random:
    return random.Random(f"{options.seed}/{layer_index}/{panel[0]},{panel[1]}")


def _panel_marks(
    data: _LayerData,
    graphic: ResolvedGraphic,
    scales: dict[str, ScaleDef],
    options: ExecOptions,
    row_key,
    col_key,
    panel: tuple[int, int],
    warnings_out: list[Diagnostic],
    domains: dict[str, list[float]],
) -> list[Mark]:
    layer = data.layer
    rows = _panel_rows(data, graphic, row_key, col_key)
    frame = _post_cta_frame(data, graphic, rows, warnings_out)
    if frame.n == 0:
        return []

    polar = graphic.coord == "polar"
    pos_aes = "theta" if polar else "x"
    val_aes = "r" if polar else "y"
    collect_names = [f"__c{i}" for i in range(len(layer.collections or ()))] or None

    marks: list[Mark]
    if layer.geom == "point":
        xs = frame.columns.get(pos_aes, [0.0] * frame.n)
        ys = frame.columns.get(val_aes, [0.0] * frame.n)
        colors = frame.columns.get("color", [None] * frame.n)
        if layer.qualifier == "jittered" and pos_aes in frame.columns:
            width = jitter_width(xs, scales[pos_aes].kind == "discrete")
            xs = jitter_values(xs, width, _rng_for(options, layer.index, panel))
        marks = [PointMark(x, y, c) for x, y, c in zip(xs, ys, colors)]
    elif layer.geom == "line":
        marks = _line_marks(frame, layer, collect_names, pos_aes, val_aes)
    elif layer.geom == "bar":
        marks = _bar_marks(frame, data, scales, polar)
    else:
        raise ValueError(f"unknown geom {layer.geom!r}")

    _accumulate_domains(marks, graphic.coord, domains)
    return marks


def _line_marks(
    frame: AestheticFrame,
    layer: ResolvedLayer,
    collect_names: list[str] | None,
    pos_aes: str,
    val_aes: str,
) -> list[Mark]:
    xs = frame.columns.get(pos_aes, [0.0] * frame.n)
    ys = frame.columns.get(val_aes, [0.0] * frame.n)
    colors = frame.columns.get("color", [None] * frame.n)
    marks: list[Mark] = []
    for _, idxs in collect(frame, collect_names, pos_aes):
        if layer.qualifier == "regression":
            cx = [xs[i] for i in idxs]
            cy = [ys[i] for i in idxs]
            slope, intercept = fit_line(cx, cy)
            x0, x1 = min(cx), max(cx)
            marks.append(SegmentMark(
                x0, intercept + slope * x0, x1, intercept + slope * x1, colors[idxs[0]],
            ))
        else:
            for a, b in zip(idxs, idxs[1:]):
                marks.append(SegmentMark(xs[a], ys[a], xs[b], ys[b], colors[a]))
    return marks


def _bar_marks(
    frame: AestheticFrame,
    data: _LayerData,
    scales: dict[str, ScaleDef],
    polar: bool,
) -> list[Mark]:
    layer = data.layer
    pos_aes = "r" if polar else "x"
    val_aes = "theta" if polar else "y"
    has_pos = pos_aes in frame.columns
    positions = frame.columns.get(pos_aes, [None] * frame.n)
    values = frame.columns.get(val_aes, [0.0] * frame.n)
    colors = frame.columns.get("color", [None] * frame.n)
    color_order = (scales["color"].categories if "color" in scales else None) or []
    segments = stack(
        positions, values, colors, color_order,
        unstacked=layer.qualifier == "unstacked", polar=polar,
    )
    if polar:
        return [
            WedgeMark(a0, a1, r0=0.0 if has_pos else None, r1=pos if has_pos else None, color=color)
            for pos, a0, a1, color in segments
        ]
    width = _bar_width(data, scales, positions, has_pos)
    return [
        RectMark(pos if pos is not None else 0.0, width, v0, v1, color)
        for pos, v0, v1, color in segments
    ]


def _bar_width(data: _LayerData, scales: dict[str, ScaleDef], positions: list, has_pos: bool) -> float:
    if not has_pos:
        return 1.0
    x_col = data.aes_cols.get("x")
    if x_col is not None and x_col.binned and x_col.bin_def is not None:
        return x_col.bin_def.width if not x_col.bin_def.degenerate else 1.0
    if scales["x"].kind == "discrete":
        return 1.0
    distinct = sorted({p for p in positions if p is not None})
    if len(distinct) < 2:
        return 1.0
    return min(b - a for a, b in zip(distinct, distinct[1:]))


def _accumulate_domains(marks: list[Mark], coord: str, domains: dict[str, list[float]]) -> None:
    x_aes = "theta" if coord == "polar" else "x"
    y_aes = "r" if coord == "polar" else "y"

    def add(aesthetic: str, *values: float | None) -> None:
        present = [v for v in values if v is not None]
        if not present:
            return
        lo, hi = min(present), max(present)
        if aesthetic not in domains:
            domains[aesthetic] = [lo, hi]
        else:
            domains[aesthetic][0] = min(domains[aesthetic][0], lo)
            domains[aesthetic][1] = max(domains[aesthetic][1], hi)

    for m in marks:
        if isinstance(m, PointMark):
            add(x_aes, m.x)
            add(y_aes, m.y)
        elif isinstance(m, SegmentMark):
            add(x_aes, m.x0, m.x1)
            add(y_aes, m.y0, m.y1)
        elif isinstance(m, RectMark):
            add("x", m.x_center - m.width / 2.0, m.x_center + m.width / 2.0)
            add("y", m.y0, m.y1)
        elif isinstance(m, WedgeMark):
            add("theta", m.theta0, m.theta1)
            add("r", m.r0, m.r1)
