"""Deterministic SVG rendering of panelled mark sets.

Fixed element order (panels row-major, layers in statement order, marks in
index order), fixed numeric precision and no timestamps: identical inputs
give byte-identical documents. Cartesian panels get grey backgrounds, white
gridlines and outer-edge axes; polar panels draw wedges with a legend only.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .analyzer import ScaleDef
from .diagnostics import Diagnostic, SglError
from .pipeline import (
    MarkSet,
    PanelGrid,
    PointMark,
    RectMark,
    SegmentMark,
    TWO_PI,
    WedgeMark,
)

DEFAULT_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


@dataclass(frozen=True)
class RenderConfig:
    width: int = 640
    height: int = 480
    margin: int = 8
    palette: tuple[str, ...] = DEFAULT_PALETTE
    font_family: str = "DejaVu Sans, sans-serif"
    font_size: int = 11
    precision: int = 2
    point_radius: float = 2.5

    def __post_init__(self):
        if self.width <= 2 * self.margin or self.height <= 2 * self.margin:
            raise ValueError("width and height must exceed twice the margin")
        if len(self.palette) < 10:
            raise ValueError("palette needs at least 10 colors")


def load_config(path: str | Path, base: RenderConfig | None = None) -> RenderConfig:
    """Read flat key=value overrides (palette as comma-separated hex)."""
    config = base or RenderConfig()
    overrides: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SglError(Diagnostic("E_CONFIG", f"expected key=value, got {line!r}", line=lineno))
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in ("width", "height", "margin", "font_size"):
            overrides[key] = int(value)
        elif key in ("precision",):
            overrides[key] = int(value)
        elif key in ("point_radius",):
            overrides[key] = float(value)
        elif key == "palette":
            overrides[key] = tuple(v.strip() for v in value.split(",") if v.strip())
        elif key == "font_family":
            overrides[key] = value
        else:
            raise SglError(Diagnostic("E_CONFIG", f"unknown config key {key!r}", line=lineno))
    try:
        return replace(config, **overrides)
    except ValueError as exc:
        raise SglError(Diagnostic("E_CONFIG", str(exc))) from None


@dataclass(frozen=True)
class Axis:
    """Resolved axis: tick positions live inside the (possibly expanded) domain."""

    aesthetic: str
    domain: tuple[float, float]
    ticks: tuple[tuple[float, str], ...]
    title: str


@dataclass(frozen=True)
class Viewport:
    """Device-space panel rectangle plus the scaled-space domains mapped onto it."""

    x: float
    y: float
    width: float
    height: float
    xdomain: tuple[float, float] = (0.0, 1.0)
    ydomain: tuple[float, float] = (0.0, 1.0)


# -- tick computation ---------------------------------------------------------


def _fmt_num(v: float) -> str:
    r = round(v, 10)
    if r == int(r):
        return str(int(r))
    return f"{r:.12g}"


def _nice_linear(lo: float, hi: float) -> tuple[tuple[float, float], list[tuple[float, str]]]:
    span = hi - lo
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    eps = span * 1e-9
    for mult in (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0):
        step = mult * mag
        first = math.ceil((lo - eps) / step)
        last = math.floor((hi + eps) / step)
        count = last - first + 1
        if count > 7:
            continue
        if count < 4:
            lo = math.floor((lo + eps) / step) * step
            hi = math.ceil((hi - eps) / step) * step
            first = math.ceil((lo - eps) / step)
            last = math.floor((hi + eps) / step)
        ticks = [(round(k * step, 10), _fmt_num(k * step)) for k in range(first, last + 1)]
        return (lo, hi), ticks
    return (lo, hi), [(lo, _fmt_num(lo)), (hi, _fmt_num(hi))]


def _log_ticks(lo: float, hi: float) -> tuple[tuple[float, float], list[tuple[float, str]]]:
    def powers(a: float, b: float) -> list[int]:
        return list(range(math.ceil(a - 1e-9), math.floor(b + 1e-9) + 1))

    ks = powers(lo, hi)
    if len(ks) < 2:
        lo, hi = float(math.floor(lo)), float(math.ceil(hi))
        ks = powers(lo, hi)
    while len(ks) < 2:
        lo -= 1.0
        hi += 1.0
        ks = powers(lo, hi)
    ticks = [(float(k), _log_label(k)) for k in ks]
    return (lo, hi), ticks


def _log_label(k: int) -> str:
    if k >= 0:
        return str(10 ** k)
    return f"{10.0 ** k:g}"


def axis_layout(
    domain: tuple[float, float] | None,
    kind: str,
    categories: list | None = None,
) -> tuple[tuple[float, float], list[tuple[float, str]]]:
    """(possibly expanded) axis domain plus ticks inside it."""
    if kind == "discrete":
        cats = categories or []
        ticks = [(float(i), str(c)) for i, c in enumerate(cats)]
        return (-0.5, max(len(cats) - 1, 0) + 0.5), ticks
    lo, hi = domain if domain is not None else (0.0, 1.0)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    if kind == "log10":
        return _log_ticks(lo, hi)
    return _nice_linear(lo, hi)


def compute_ticks(
    domain: tuple[float, float] | None,
    kind: str,
    categories: list | None = None,
) -> list[tuple[float, str]]:
    """Tick (position, label) pairs: 4-7 nice steps for linear scales, integer
    powers of ten for log scales, one centered tick per category otherwise."""
    return axis_layout(domain, kind, categories)[1]


def pad_domain(domain: tuple[float, float]) -> tuple[float, float]:
    lo, hi = domain
    if lo == hi:
        return lo - 0.5, hi + 0.5
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


# -- projection ----------------------------------------------------------------


def _scale_to(v: float, domain: tuple[float, float], a: float, b: float) -> float:
    lo, hi = domain
    if hi == lo:
        return (a + b) / 2.0
    return a + (v - lo) / (hi - lo) * (b - a)


def _polar_center(viewport: Viewport) -> tuple[float, float, float]:
    cx = viewport.x + viewport.width / 2.0
    cy = viewport.y + viewport.height / 2.0
    radius = min(viewport.width, viewport.height) / 2.0
    return cx, cy, radius


def _polar_point(cx: float, cy: float, radius: float, angle: float) -> tuple[float, float]:
    # angle 0 at 12 o'clock, clockwise
    return cx + radius * math.sin(angle), cy - radius * math.cos(angle)


def project(mark, coord: str, viewport: Viewport):
    """Map a scaled-space mark into a device-space drawing command tuple.

    Cartesian commands: ("circle", (cx, cy)), ("line", (x0, y0, x1, y1)),
    ("rect", (x, y, w, h)); polar adds ("wedge", (cx, cy, r0, r1, a0, a1)).
    Device y grows downward.
    """
    if coord == "polar":
        cx, cy, radius = _polar_center(viewport)
        if isinstance(mark, WedgeMark):
            r1 = radius if mark.r1 is None else _scale_to(mark.r1, viewport.ydomain, 0.0, radius)
            r0 = 0.0 if mark.r0 is None else _scale_to(mark.r0, viewport.ydomain, 0.0, radius)
            return ("wedge", (cx, cy, r0, r1, mark.theta0, mark.theta1))
        if isinstance(mark, PointMark):
            angle = _scale_to(mark.x, viewport.xdomain, 0.0, TWO_PI)
            r = _scale_to(mark.y, viewport.ydomain, 0.0, radius)
            return ("circle", _polar_point(cx, cy, r, angle))
        if isinstance(mark, SegmentMark):
            a0 = _scale_to(mark.x0, viewport.xdomain, 0.0, TWO_PI)
            a1 = _scale_to(mark.x1, viewport.xdomain, 0.0, TWO_PI)
            r0 = _scale_to(mark.y0, viewport.ydomain, 0.0, radius)
            r1 = _scale_to(mark.y1, viewport.ydomain, 0.0, radius)
            return ("line", (*_polar_point(cx, cy, r0, a0), *_polar_point(cx, cy, r1, a1)))
        raise TypeError(f"cannot project {type(mark).__name__} in polar coordinates")

    def sx(v: float) -> float:
        return _scale_to(v, viewport.xdomain, viewport.x, viewport.x + viewport.width)

    def sy(v: float) -> float:
        return _scale_to(v, viewport.ydomain, viewport.y + viewport.height, viewport.y)

    if isinstance(mark, PointMark):
        return ("circle", (sx(mark.x), sy(mark.y)))
    if isinstance(mark, SegmentMark):
        return ("line", (sx(mark.x0), sy(mark.y0), sx(mark.x1), sy(mark.y1)))
    if isinstance(mark, RectMark):
        x0 = sx(mark.x_center - mark.width / 2.0)
        x1 = sx(mark.x_center + mark.width / 2.0)
        y0 = sy(mark.y0)
        y1 = sy(mark.y1)
        return ("rect", (min(x0, x1), min(y0, y1), abs(x1 - x0), abs(y1 - y0)))
    raise TypeError(f"cannot project {type(mark).__name__} in cartesian coordinates")


# -- SVG emission ---------------------------------------------------------------


class _Svg:
    def __init__(self, config: RenderConfig):
        self.config = config
        self.parts: list[str] = []

    def fmt(self, v: float) -> str:
        s = f"{v:.{self.config.precision}f}"
        return "0.00" if s == "-0.00" else s

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def text(
        self, x: float, y: float, content: str, *,
        anchor: str = "start", size: int | None = None, rotate: float | None = None,
        fill: str = "#333333",
    ) -> str:
        size = size or self.config.font_size
        transform = ""
        if rotate is not None:
            transform = f' transform="rotate({_fmt_num(rotate)} {self.fmt(x)} {self.fmt(y)})"'
        return (
            f'<text x="{self.fmt(x)}" y="{self.fmt(y)}" font-family="{self.config.font_family}" '
            f'font-size="{size}" text-anchor="{anchor}" fill="{fill}"{transform}>'
            f"{escape_text(content)}</text>"
        )


def escape_text(value: str) -> str:
    return value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _wedge_path(svg: _Svg, cx: float, cy: float, r0: float, r1: float, a0: float, a1: float) -> str:
    f = svg.fmt
    sweep = a1 - a0
    if sweep >= TWO_PI - 1e-12:
        # full disc: two half arcs keep the path well-defined
        top = _polar_point(cx, cy, r1, 0.0)
        bottom = _polar_point(cx, cy, r1, math.pi)
        d = (
            f"M {f(top[0])} {f(top[1])} "
            f"A {f(r1)} {f(r1)} 0 1 1 {f(bottom[0])} {f(bottom[1])} "
            f"A {f(r1)} {f(r1)} 0 1 1 {f(top[0])} {f(top[1])} Z"
        )
        return d
    large = 1 if sweep > math.pi else 0
    p0 = _polar_point(cx, cy, r1, a0)
    p1 = _polar_point(cx, cy, r1, a1)
    if r0 <= 1e-12:
        return (
            f"M {f(cx)} {f(cy)} L {f(p0[0])} {f(p0[1])} "
            f"A {f(r1)} {f(r1)} 0 {large} 1 {f(p1[0])} {f(p1[1])} Z"
        )
    q1 = _polar_point(cx, cy, r0, a1)
    q0 = _polar_point(cx, cy, r0, a0)
    return (
        f"M {f(p0[0])} {f(p0[1])} "
        f"A {f(r1)} {f(r1)} 0 {large} 1 {f(p1[0])} {f(p1[1])} "
        f"L {f(q1[0])} {f(q1[1])} "
        f"A {f(r0)} {f(r0)} 0 {large} 0 {f(q0[0])} {f(q0[1])} Z"
    )


@dataclass
class _Layout:
    plot_x: float
    plot_y: float
    panel_w: float
    panel_h: float
    gap: float
    nrows: int
    ncols: int

    def panel_rect(self, ri: int, ci: int) -> tuple[float, float, float, float]:
        x = self.plot_x + ci * (self.panel_w + self.gap)
        y = self.plot_y + ri * (self.panel_h + self.gap)
        return x, y, self.panel_w, self.panel_h


def render(
    grid: PanelGrid,
    scales: dict[str, ScaleDef],
    coord: str,
    config: RenderConfig | None = None,
    parallel: bool = False,
) -> str:
    """Render the panel grid as a standalone SVG 1.1 document."""
    config = config or RenderConfig()
    svg = _Svg(config)
    polar = coord == "polar"

    color_scale = scales.get("color")
    categories = list(color_scale.categories or []) if color_scale is not None else []
    color_of = {c: config.palette[i % len(config.palette)] for i, c in enumerate(categories)}
    default_color = config.palette[0]

    x_aes = "theta" if polar else "x"
    y_aes = "r" if polar else "y"
    x_axis = _resolve_axis(scales.get(x_aes), x_aes)
    y_axis = _resolve_axis(scales.get(y_aes), y_aes)
    # bars leave a sliver of background: 0.8 of the band on discrete or
    # implicit x axes, 0.95 of the slot on continuous ones
    x_scale = scales.get("x")
    bar_shrink = 0.8 if x_scale is None or x_scale.kind == "discrete" else 0.95

    nrows, ncols = grid.shape
    has_col_strips = any(label is not None for label in grid.col_labels)
    has_row_strips = any(label is not None for label in grid.row_labels)
    strip = 18.0
    legend_w = _legend_width(config, color_scale, categories) if categories else 0.0
    axis_left = 8.0 if polar else 52.0
    axis_bottom = 8.0 if polar else 42.0
    m = float(config.margin)

    plot_x = m + axis_left
    plot_y = m + (strip if has_col_strips else 0.0)
    plot_right = config.width - m - legend_w - (strip if has_row_strips else 0.0)
    plot_bottom = config.height - m - axis_bottom
    gap = 8.0
    panel_w = (plot_right - plot_x - gap * (ncols - 1)) / ncols
    panel_h = (plot_bottom - plot_y - gap * (nrows - 1)) / nrows
    layout = _Layout(plot_x, plot_y, panel_w, panel_h, gap, nrows, ncols)

    svg.add(
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{config.width}" '
        f'height="{config.height}" viewBox="0 0 {config.width} {config.height}">'
    )
    svg.add(f'<rect width="{config.width}" height="{config.height}" fill="#ffffff"/>')

    def build_panel(ri: int, ci: int) -> str:
        x, y, w, h = layout.panel_rect(ri, ci)
        viewport = Viewport(x, y, w, h, x_axis.domain, y_axis.domain)
        return _panel_fragment(
            svg, grid.panels[(ri, ci)], coord, viewport, x_axis, y_axis,
            color_of, default_color, bar_shrink,
        )

    cells = [(ri, ci) for ri in range(nrows) for ci in range(ncols)]
    if parallel and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(cells))) as pool:
            fragments = list(pool.map(lambda rc: build_panel(*rc), cells))
    else:
        fragments = [build_panel(*rc) for rc in cells]
    for fragment in fragments:
        svg.add(fragment)

    if not polar:
        _emit_axes(svg, layout, x_axis, y_axis, plot_bottom)
    _emit_strips(svg, layout, grid, has_col_strips, has_row_strips, plot_right)
    if categories:
        _emit_legend(svg, config, color_scale, categories, color_of, plot_right + (strip if has_row_strips else 0.0))

    svg.add("</svg>")
    return "\n".join(svg.parts) + "\n"


def _resolve_axis(scale: ScaleDef | None, aesthetic: str) -> Axis:
    if scale is None:
        return Axis(aesthetic, (0.0, 1.0), (), "")
    if scale.kind == "discrete":
        domain, ticks = axis_layout(None, "discrete", scale.categories)
        return Axis(aesthetic, domain, tuple(ticks), scale.title)
    padded = pad_domain(scale.domain) if scale.domain is not None else (0.0, 1.0)
    domain, ticks = axis_layout(padded, scale.kind)
    return Axis(aesthetic, domain, tuple(ticks), scale.title)


def _legend_width(config: RenderConfig, scale: ScaleDef | None, categories: list) -> float:
    label_chars = max(
        [len(str(c)) for c in categories] + [len(scale.title) if scale is not None else 0]
    )
    return 30.0 + min(label_chars, 24) * config.font_size * 0.62


def _panel_fragment(
    svg: _Svg,
    marksets: list[MarkSet],
    coord: str,
    viewport: Viewport,
    x_axis: Axis,
    y_axis: Axis,
    color_of: dict,
    default_color: str,
    bar_shrink: float = 1.0,
) -> str:
    config = svg.config
    f = svg.fmt
    parts: list[str] = ["<g>"]
    if coord != "polar":
        parts.append(
            f'<rect x="{f(viewport.x)}" y="{f(viewport.y)}" width="{f(viewport.width)}" '
            f'height="{f(viewport.height)}" fill="#ebebeb"/>'
        )
        for pos, _ in x_axis.ticks:
            dx = _scale_to(pos, viewport.xdomain, viewport.x, viewport.x + viewport.width)
            parts.append(
                f'<line x1="{f(dx)}" y1="{f(viewport.y)}" x2="{f(dx)}" '
                f'y2="{f(viewport.y + viewport.height)}" stroke="#ffffff" stroke-width="1"/>'
            )
        for pos, _ in y_axis.ticks:
            dy = _scale_to(pos, viewport.ydomain, viewport.y + viewport.height, viewport.y)
            parts.append(
                f'<line x1="{f(viewport.x)}" y1="{f(dy)}" x2="{f(viewport.x + viewport.width)}" '
                f'y2="{f(dy)}" stroke="#ffffff" stroke-width="1"/>'
            )

    for ms in marksets:
        if not ms.marks:
            continue
        parts.append(f'<g data-layer="{ms.layer_index}" data-geom="{ms.geom}">')
        for mark in ms.marks:
            fill = color_of.get(mark.color, default_color) if mark.color is not None else default_color
            if isinstance(mark, RectMark) and bar_shrink != 1.0:
                mark = dataclasses.replace(mark, width=mark.width * bar_shrink)
            shape = project(mark, coord, viewport)
            kind, geometry = shape
            if kind == "circle":
                cx, cy = geometry
                parts.append(
                    f'<circle cx="{f(cx)}" cy="{f(cy)}" r="{_fmt_num(config.point_radius)}" fill="{fill}"/>'
                )
            elif kind == "line":
                x0, y0, x1, y1 = geometry
                parts.append(
                    f'<line x1="{f(x0)}" y1="{f(y0)}" x2="{f(x1)}" y2="{f(y1)}" '
                    f'stroke="{fill}" stroke-width="1.5"/>'
                )
            elif kind == "rect":
                x, y, w, h = geometry
                parts.append(
                    f'<rect x="{f(x)}" y="{f(y)}" width="{f(w)}" height="{f(h)}" '
                    f'fill="{fill}" stroke="#ffffff" stroke-width="0.5"/>'
                )
            elif kind == "wedge":
                cx, cy, r0, r1, a0, a1 = geometry
                path = _wedge_path(svg, cx, cy, r0, r1, a0, a1)
                parts.append(
                    f'<path d="{path}" fill="{fill}" stroke="#ffffff" stroke-width="0.5"/>'
                )
        parts.append("</g>")
    parts.append("</g>")
    return "\n".join(parts)


def _emit_axes(svg: _Svg, layout: _Layout, x_axis: Axis, y_axis: Axis, plot_bottom: float) -> None:
    f = svg.fmt
    config = svg.config
    # x ticks under the bottom row of each column
    for ci in range(layout.ncols):
        x, _, w, _ = layout.panel_rect(layout.nrows - 1, ci)
        for pos, label in x_axis.ticks:
            dx = _scale_to(pos, x_axis.domain, x, x + w)
            svg.add(
                f'<line x1="{f(dx)}" y1="{f(plot_bottom)}" x2="{f(dx)}" '
                f'y2="{f(plot_bottom + 4)}" stroke="#333333" stroke-width="1"/>'
            )
            svg.add(svg.text(dx, plot_bottom + 15, label, anchor="middle", size=config.font_size - 1))
    # y ticks left of each row
    for ri in range(layout.nrows):
        _, y, _, h = layout.panel_rect(ri, 0)
        for pos, label in y_axis.ticks:
            dy = _scale_to(pos, y_axis.domain, y + h, y)
            svg.add(
                f'<line x1="{f(layout.plot_x - 4)}" y1="{f(dy)}" x2="{f(layout.plot_x)}" '
                f'y2="{f(dy)}" stroke="#333333" stroke-width="1"/>'
            )
            svg.add(svg.text(layout.plot_x - 6, dy + 3.5, label, anchor="end", size=config.font_size - 1))
    # axis titles
    total_w = layout.ncols * layout.panel_w + (layout.ncols - 1) * layout.gap
    total_h = layout.nrows * layout.panel_h + (layout.nrows - 1) * layout.gap
    if x_axis.title:
        svg.add(svg.text(
            layout.plot_x + total_w / 2.0, plot_bottom + 33, x_axis.title,
            anchor="middle", size=config.font_size + 1,
        ))
    if y_axis.title:
        cx = layout.plot_x - 38
        cy = layout.plot_y + total_h / 2.0
        svg.add(svg.text(
            cx, cy, y_axis.title, anchor="middle", size=config.font_size + 1, rotate=-90.0,
        ))


def _emit_strips(
    svg: _Svg,
    layout: _Layout,
    grid: PanelGrid,
    has_col_strips: bool,
    has_row_strips: bool,
    plot_right: float,
) -> None:
    f = svg.fmt
    if has_col_strips:
        for ci, label in enumerate(grid.col_labels):
            x, y, w, _ = layout.panel_rect(0, ci)
            svg.add(
                f'<rect x="{f(x)}" y="{f(y - 18)}" width="{f(w)}" height="16" fill="#d9d9d9"/>'
            )
            svg.add(svg.text(x + w / 2.0, y - 6, label or "", anchor="middle", size=svg.config.font_size - 1))
    if has_row_strips:
        for ri, label in enumerate(grid.row_labels):
            _, y, _, h = layout.panel_rect(ri, layout.ncols - 1)
            x = plot_right + 2
            svg.add(
                f'<rect x="{f(x)}" y="{f(y)}" width="16" height="{f(h)}" fill="#d9d9d9"/>'
            )
            svg.add(svg.text(
                x + 11, y + h / 2.0, label or "", anchor="middle",
                size=svg.config.font_size - 1, rotate=90.0,
            ))


def _emit_legend(
    svg: _Svg,
    config: RenderConfig,
    scale: ScaleDef | None,
    categories: list,
    color_of: dict,
    x: float,
) -> None:
    f = svg.fmt
    lx = x + 10
    ly = config.margin + 16.0
    if scale is not None and scale.title:
        svg.add(svg.text(lx, ly, scale.title, size=config.font_size))
        ly += 8
    for cat in categories:
        ly += 16
        svg.add(
            f'<rect x="{f(lx)}" y="{f(ly - 9)}" width="10" height="10" fill="{color_of[cat]}"/>'
        )
        svg.add(svg.text(lx + 15, ly, str(cat), size=config.font_size - 1))
