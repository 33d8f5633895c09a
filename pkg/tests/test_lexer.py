"""Lexer tests: token classification, positions, raw-SQL capture, round trips."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from sgl.diagnostics import SglError
from sgl.lexer import Token, TokenKind, capture_raw_sql, tokenize

from conftest import load_corpus


def kinds(tokens: list[Token]) -> list[TokenKind]:
    return [t.kind for t in tokens]


def test_using_points_statement():
    tokens = tokenize("using points;")
    assert kinds(tokens) == [TokenKind.KEYWORD, TokenKind.KEYWORD, TokenKind.SEMICOLON]
    assert tokens[0].keyword == "using"
    assert tokens[1].keyword == "points"


def test_empty_input_yields_empty_stream():
    assert tokenize("") == []
    assert tokenize("   \n\t  ") == []


def test_keywords_case_insensitive_identifiers_preserved():
    upper = tokenize("VISUALIZE Horsepower AS X FROM Cars USING Points;")
    lower = tokenize("visualize Horsepower as X from Cars using Points;")
    assert kinds(upper) == kinds(lower)
    assert [t.keyword for t in upper] == [t.keyword for t in lower]
    assert upper[1].lexeme == "Horsepower"  # identifier case preserved
    assert upper[0].keyword == "visualize"


def test_positions_are_one_based_per_line():
    tokens = tokenize("visualize a as x\nfrom t;")
    assert (tokens[0].line, tokens[0].col) == (1, 1)
    assert (tokens[1].line, tokens[1].col) == (1, 11)
    from_tok = next(t for t in tokens if t.keyword == "from")
    assert (from_tok.line, from_tok.col) == (2, 1)
    assert (tokens[-1].line, tokens[-1].col) == (2, 7)


def test_comments_skipped():
    tokens = tokenize("-- a comment\nfrom cars -- trailing\n;")
    assert [t.lexeme for t in tokens] == ["from", "cars", ";"]


def test_string_literal_with_doubled_quote_escape():
    tokens = tokenize("title x as 'it''s fine';")
    text = next(t for t in tokens if t.kind is TokenKind.STRING)
    assert text.value == "it's fine"
    assert text.lexeme == "'it''s fine'"


def test_number_literals():
    tokens = tokenize("1977 2.5")
    assert [t.value for t in tokens] == [1977, 2.5]
    assert [t.kind for t in tokens] == [TokenKind.NUMBER, TokenKind.NUMBER]


@pytest.mark.parametrize("source,line,col", [
    ("title x as 'oops", 1, 12),
    ("visualize a as x\nfrom t\ntitle x as 'oops", 3, 12),
])
def test_unterminated_string(source, line, col):
    with pytest.raises(SglError) as err:
        tokenize(source)
    d = err.value.first
    assert d.code == "UnterminatedString"
    assert (d.line, d.col) == (line, col)


@pytest.mark.parametrize("source,char,line,col", [
    ("visualize hp@ as x", "@", 1, 13),
    ("visualize origin = 'J' as x", "=", 1, 18),
    ("from cars\n# nope", "#", 2, 1),
])
def test_illegal_character(source, char, line, col):
    with pytest.raises(SglError) as err:
        tokenize(source)
    d = err.value.first
    assert d.code == "IllegalCharacter"
    assert (d.line, d.col) == (line, col)
    assert repr(char)[1:-1] in d.message


def test_from_subquery_becomes_raw_sql_token():
    tokens = tokenize("visualize a as x from (select * from cars) using points;")
    raw = next(t for t in tokens if t.kind is TokenKind.RAW_SQL)
    assert raw.lexeme == "select * from cars"
    i = tokens.index(raw)
    assert tokens[i - 1].kind is TokenKind.LPAREN
    assert tokens[i + 1].kind is TokenKind.RPAREN


def test_using_parens_are_not_raw_sql():
    tokens = tokenize("using (points layer lines)")
    assert TokenKind.RAW_SQL not in kinds(tokens)
    assert kinds(tokens).count(TokenKind.KEYWORD) == 4


@pytest.mark.parametrize("body,expected", [
    ("select * from cars", "select * from cars"),
    ("select (1)", "select (1)"),
    ("select ')' as c", "select ')' as c"),
    ("select                                         *\n  from cars\n  where origin = 'Japan'", None),
])
def test_capture_raw_sql_examples(body, expected):
    capture = capture_raw_sql("(" + body + ")", 1)
    assert capture.token.kind is TokenKind.RAW_SQL
    assert capture.token.lexeme == (expected if expected is not None else body.strip())
    assert capture.end == len(body) + 2


def test_capture_raw_sql_unbalanced():
    with pytest.raises(SglError) as err:
        capture_raw_sql("(select * from cars", 1)
    assert err.value.first.code == "UnbalancedParens"


def _reference_capture(source: str, start: int):
    """Independent quote-aware bracket matcher used as the oracle."""
    depth = 1
    i = start
    quote = None
    while i < len(source):
        ch = source[i]
        if quote is not None:
            if ch == quote:
                if i + 1 < len(source) and source[i + 1] == quote:
                    i += 2
                    continue
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return source[start:i].strip(), i + 1
        i += 1
    return None


_plain = st.text(alphabet="abc =<>,.*; \n", min_size=0, max_size=12)
_quoted = st.text(alphabet="abc)(' ", min_size=0, max_size=8).map(
    lambda s: "'" + s.replace("'", "''") + "'"
)
_balanced = st.recursive(
    _plain,
    lambda inner: st.lists(
        st.one_of(_plain, _quoted, inner.map(lambda s: "(" + s + ")")),
        min_size=0, max_size=4,
    ).map(" ".join),
    max_leaves=8,
)


@given(_balanced)
def test_capture_matches_reference_matcher(body):
    source = "(" + body + ")"
    expected = _reference_capture(source, 1)
    assert expected is not None
    capture = capture_raw_sql(source, 1)
    assert (capture.token.lexeme, capture.end) == expected


def test_round_trip_corpus_statements():
    for name, text in load_corpus().items():
        tokens = tokenize(text)
        joined = " ".join(t.lexeme for t in tokens)
        relexed = tokenize(joined)
        assert kinds(relexed) == kinds(tokens), name
        assert [t.lexeme for t in relexed] == [t.lexeme for t in tokens], name


def test_token_positions_anchor_their_lexemes():
    for name, text in load_corpus().items():
        lines = text.split("\n")
        for token in tokenize(text):
            line_tail = "\n".join(lines[token.line - 1:])
            anchored = line_tail[token.col - 1:]
            assert anchored.startswith(token.lexeme), (name, token)


def test_keyword_only_input_case_insensitive_kinds():
    source = "visualize from group by collect using scale facet title layer points bars lines regression jittered unstacked stacked vertically horizontally as"
    lower = tokenize(source)
    upper = tokenize(source.upper())
    mixed = tokenize(source.title())
    assert kinds(lower) == kinds(upper) == kinds(mixed)
    assert [t.keyword for t in lower] == [t.keyword for t in upper] == [t.keyword for t in mixed]


def test_diagnostics_stay_inside_input_bounds():
    rng = random.Random(42)
    alphabet = "visualize from using points ( ) ; ' @ = \n \t abc 12"
    for _ in range(300):
        source = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 40)))
        try:
            tokenize(source)
        except SglError as exc:
            lines = source.split("\n")
            d = exc.first
            assert 1 <= d.line <= len(lines)
            assert 1 <= d.col <= len(lines[d.line - 1]) + 1
