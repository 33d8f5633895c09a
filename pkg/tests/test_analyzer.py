"""Analyzer tests: typing, coordinate inference, scales, grammar rules."""

from __future__ import annotations

import pytest

from sgl.analyzer import analyze, infer_coord
from sgl.ast import ColumnRef, FuncCall
from sgl.diagnostics import SglError
from sgl.parser import parse_text, unparse

from conftest import load_corpus


def analyze_text(text, schemas):
    return analyze(parse_text(text), schemas)


def codes(err) -> list[str]:
    return [d.code for d in err.value.diagnostics]


HISTOGRAM = (
    "visualize\n  bin(miles_per_gallon) as x,\n  count(*) as y\nfrom cars\n"
    "group by\n  bin(miles_per_gallon)\nusing bars;"
)


def test_histogram_layer_resolution(schemas):
    graphic = analyze_text(HISTOGRAM, schemas)
    assert graphic.coord == "cartesian"
    layer = graphic.layers[0]
    assert layer.pre_aesthetics == ("x",)
    assert layer.agg_aesthetics == ("y",)
    assert layer.groupings == (FuncCall("bin", (ColumnRef("miles_per_gallon"),)),)
    assert layer.geom == "bar"
    assert layer.geom_class == "individual"
    assert graphic.scales["x"].kind == "linear"
    assert graphic.scales["y"].kind == "linear"


def test_histogram_without_group_by_is_incomplete(schemas):
    text = HISTOGRAM.replace("group by\n  bin(miles_per_gallon)\n", "")
    with pytest.raises(SglError) as err:
        analyze_text(text, schemas)
    d = err.value.first
    assert d.code == "E_GROUPBY_INCOMPLETE"
    assert (d.line, d.col) == (2, 3)


def test_collect_by_requires_grouping_when_aggregating(schemas):
    text = (
        "visualize year as x, mean(miles_per_gallon) as y from cars "
        "group by year collect by origin using lines;"
    )
    with pytest.raises(SglError) as err:
        analyze_text(text, schemas)
    assert "E_GROUPBY_INCOMPLETE" in codes(err)


def test_collect_by_without_aggregation_is_free(schemas):
    text = "visualize age as x, circumference as y from trees collect by tree_id using lines;"
    graphic = analyze_text(text, schemas)
    assert graphic.layers[0].collections == (ColumnRef("tree_id"),)


def test_coordinate_mix_rejected(schemas):
    text = (
        "visualize horsepower as x, miles_per_gallon as y from cars using points\n"
        "layer\n"
        "visualize count(*) as theta, origin as color from cars group by origin using bars;"
    )
    with pytest.raises(SglError) as err:
        analyze_text(text, schemas)
    assert "E_COORD_MIX" in codes(err)


@pytest.mark.parametrize("mappings,coord", [
    ({"x": "a", "y": "b"}, "cartesian"),
    ({"theta": "a", "color": "c"}, "polar"),
    ({"y": "a", "color": "c"}, "cartesian"),
    ({"r": "a"}, "polar"),
])
def test_infer_coord(mappings, coord):
    assert infer_coord([mappings]) == coord


def test_no_position_rejected(schemas):
    with pytest.raises(SglError) as err:
        analyze_text("visualize origin as color from cars using points;", schemas)
    assert "E_NO_POSITION" in codes(err)


def test_type_conflict_across_layers(schemas):
    text = (
        "visualize horsepower as x, miles_per_gallon as y from cars using points\n"
        "layer\n"
        "visualize origin as x, miles_per_gallon as y from cars using points;"
    )
    with pytest.raises(SglError) as err:
        analyze_text(text, schemas)
    assert "E_TYPE_CONFLICT" in codes(err)


@pytest.mark.parametrize("using", ["regression points", "jittered bars", "unstacked line", "stacked points"])
def test_bad_qualifier(schemas, using):
    with pytest.raises(SglError) as err:
        analyze_text(f"visualize horsepower as x from cars using {using};", schemas)
    assert "E_BAD_QUALIFIER" in codes(err)


def test_unknown_column(schemas):
    with pytest.raises(SglError) as err:
        analyze_text("visualize horsepowerr as x from cars using points;", schemas)
    d = err.value.first
    assert d.code == "E_UNKNOWN_COLUMN"
    assert (d.line, d.col) == (1, 11)


def test_column_lookup_is_case_insensitive(schemas):
    graphic = analyze_text("visualize HORSEPOWER as x from cars using points;", schemas)
    assert graphic.scales["x"].title == "HORSEPOWER"


@pytest.mark.parametrize("facet,code", [
    ("facet by origin, year, horsepower", "E_FACET_ARITY"),
    ("facet by origin, year vertically", "E_FACET_ARITY"),
])
def test_facet_arity(schemas, facet, code):
    text = f"visualize horsepower as x from cars using points {facet};"
    with pytest.raises(SglError) as err:
        analyze_text(text, schemas)
    assert code in codes(err)


def test_facet_resolution_orientation(schemas):
    horizontal = analyze_text(
        "visualize horsepower as x from cars using points facet by origin;", schemas,
    )
    assert horizontal.facet.col_expr == ColumnRef("origin")
    assert horizontal.facet.row_expr is None
    vertical = analyze_text(
        "visualize horsepower as x from cars using points facet by origin vertically;", schemas,
    )
    assert vertical.facet.row_expr == ColumnRef("origin")
    grid = analyze_text(
        "visualize horsepower as x from cars using points facet by year, origin;", schemas,
    )
    assert grid.facet.row_expr == ColumnRef("year")
    assert grid.facet.col_expr == ColumnRef("origin")


def test_aggregate_in_clause_rejected(schemas):
    with pytest.raises(SglError) as err:
        analyze_text(
            "visualize year as x from cars group by year, count(*) using points;", schemas,
        )
    assert "E_BAD_CLAUSE_EXPR" in codes(err)


def test_scale_on_discrete_rejected(schemas):
    with pytest.raises(SglError) as err:
        analyze_text(
            "visualize origin as x, miles_per_gallon as y from cars using points scale by log(x);",
            schemas,
        )
    assert "E_SCALE_ON_DISCRETE" in codes(err)


def test_scale_on_unmapped_rejected(schemas):
    with pytest.raises(SglError) as err:
        analyze_text(
            "visualize horsepower as x from cars using points scale by log(y);", schemas,
        )
    assert "E_SCALE_UNMAPPED" in codes(err)


def test_title_unmapped_rejected(schemas):
    with pytest.raises(SglError) as err:
        analyze_text(
            "visualize horsepower as x from cars using points title y as 'Y';", schemas,
        )
    assert "E_TITLE_UNMAPPED" in codes(err)


def test_numeric_color_unsupported(schemas):
    with pytest.raises(SglError) as err:
        analyze_text(
            "visualize horsepower as x, year as color from cars using points;", schemas,
        )
    assert "E_TYPE_UNSUPPORTED" in codes(err)


def test_missing_schema_reports_no_table(schemas):
    with pytest.raises(SglError) as err:
        analyze_text("visualize a as x from nowhere using points;", schemas)
    assert "E_NO_TABLE" in codes(err)


def test_scale_resolution_log_and_titles(schemas):
    graphic = analyze_text(
        "visualize horsepower as x, miles_per_gallon as y, origin as color from cars "
        "using points scale by log(x), log(y) title x as 'Horsepower';",
        schemas,
    )
    assert graphic.scales["x"].kind == "log10"
    assert graphic.scales["y"].kind == "log10"
    assert graphic.scales["color"].kind == "discrete"
    assert graphic.scales["x"].title == "Horsepower"
    assert graphic.scales["y"].title == "miles_per_gallon"
    assert graphic.scales["color"].title == "origin"
    assert graphic.scales["x"].domain is None  # unset until execution


def test_default_titles_use_expression_text(schemas):
    graphic = analyze_text(HISTOGRAM, schemas)
    assert graphic.scales["x"].title == "bin(miles_per_gallon)"
    assert graphic.scales["y"].title == "count(*)"


def test_geom_chain_expansion_preserves_counts(schemas):
    graphic = analyze_text(
        "visualize horsepower as x, miles_per_gallon as y from cars "
        "using (points layer regression line) scale by log(x);",
        schemas,
    )
    assert len(graphic.layers) == 2
    assert [l.geom for l in graphic.layers] == ["point", "line"]
    assert [l.index for l in graphic.layers] == [0, 1]
    assert graphic.layers[0].mappings == graphic.layers[1].mappings
    mapped = {a for layer in graphic.layers for a in layer.mappings}
    assert mapped == set(graphic.scales)


def test_aesthetic_may_be_absent_in_one_layer(schemas):
    graphic = analyze_text(
        "visualize horsepower as x, miles_per_gallon as y, origin as color from cars using points\n"
        "layer\n"
        "visualize horsepower as x, miles_per_gallon as y from cars using regression line;",
        schemas,
    )
    assert set(graphic.scales) == {"x", "y", "color"}


def test_chain_expansion_sums_over_corpus(schemas):
    for name, text in load_corpus().items():
        if "from (" in text:
            continue
        stmt = parse_text(text)
        graphic = analyze(stmt, schemas)
        expected = sum(len(layer.geom_chain) for layer in stmt.layers)
        assert len(graphic.layers) == expected, name


def test_analyze_deterministic_and_stable_under_reformat(schemas):
    for name, text in load_corpus().items():
        if "from (" in text:
            continue  # subquery schemas come from the backend, not this fixture map
        stmt = parse_text(text)
        first = analyze(stmt, schemas)
        second = analyze(stmt, schemas)
        assert first == second, name
        reparsed = analyze(parse_text(unparse(stmt)), schemas)
        assert first == reparsed, name
