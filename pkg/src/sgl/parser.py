"""Recursive-descent parser and canonical formatter for SGL statements.

Clause order is fixed (visualize, from, group by, collect by, using) with the
graphic-level clauses (scale by, facet by, title) only after the final layer;
anything out of order is a MisplacedClause diagnostic rather than a grammar
alternative.
"""

from __future__ import annotations

from .ast import (
    AESTHETICS,
    FUNC_NAMES,
    POSITIONAL_AESTHETICS,
    AestheticMapping,
    ColumnRef,
    Expr,
    FacetSpec,
    FuncCall,
    GeomExpr,
    LayerSpec,
    NumberLit,
    Pos,
    ScaleSpec,
    SglStatement,
    Star,
    StringLit,
    Subquery,
    TableRef,
    TitleSpec,
    expr_text,
)
from .diagnostics import Diagnostic, SglError
from .lexer import QUALIFIER_KEYWORDS, Token, TokenKind, tokenize

_GEOM_SINGULAR = {
    "point": "point", "points": "point",
    "bar": "bar", "bars": "bar",
    "line": "line", "lines": "line",
}
_GRAPHIC_CLAUSES = ("scale", "facet", "title")


class _Parser:
    def __init__(self, tokens: list[Token], end_pos: tuple[int, int] | None = None):
        self.tokens = tokens
        self.i = 0
        if end_pos is None and tokens:
            last = tokens[-1]
            end_pos = (last.line, last.col + len(last.lexeme))
        self.end_pos = end_pos or (1, 1)

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def at_keyword(self, *names: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.KEYWORD and tok.value in names

    def here(self) -> Pos:
        tok = self.peek()
        if tok is None:
            return Pos(*self.end_pos)
        return Pos(tok.line, tok.col)

    def fail(self, code: str, message: str, pos: Pos | None = None) -> SglError:
        p = pos or self.here()
        tok = self.peek()
        length = len(tok.lexeme) if tok is not None and pos is None else 1
        return SglError(Diagnostic(code, message, p.line, p.col, length))

    def describe(self, tok: Token | None) -> str:
        if tok is None:
            return "end of input"
        return f"{tok.lexeme!r}"

    def expect_keyword(self, name: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.KEYWORD or tok.value != name:
            raise self.fail("UnexpectedToken", f"expected '{name}', found {self.describe(tok)}")
        return self.next()  # type: ignore[return-value]

    def expect(self, kind: TokenKind, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not kind:
            raise self.fail("UnexpectedToken", f"expected {what}, found {self.describe(tok)}")
        return self.next()  # type: ignore[return-value]

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail("UnexpectedToken", "expected an expression, found end of input")
        if tok.kind is TokenKind.NUMBER:
            self.next()
            return NumberLit(float(tok.value), pos=Pos(tok.line, tok.col))
        if tok.kind is TokenKind.STRING:
            self.next()
            return StringLit(str(tok.value), pos=Pos(tok.line, tok.col))
        if tok.kind is TokenKind.IDENTIFIER:
            self.next()
            nxt = self.peek()
            if nxt is not None and nxt.kind is TokenKind.LPAREN:
                return self.parse_func_call(tok)
            return ColumnRef(tok.lexeme, pos=Pos(tok.line, tok.col))
        raise self.fail("UnexpectedToken", f"expected an expression, found {self.describe(tok)}")

    def parse_func_call(self, name_tok: Token) -> FuncCall:
        name = name_tok.lexeme.lower()
        if name not in FUNC_NAMES:
            raise SglError(Diagnostic(
                "UnknownFunction",
                f"unknown function '{name_tok.lexeme}' (supported: {', '.join(FUNC_NAMES)})",
                name_tok.line, name_tok.col, len(name_tok.lexeme),
            ))
        self.expect(TokenKind.LPAREN, "'('")
        args: list[Expr] = []
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.STAR:
            if name != "count":
                raise self.fail("UnexpectedToken", f"'*' is only valid inside count(*), not {name}(...)")
            self.next()
            args.append(Star(pos=Pos(tok.line, tok.col)))
        else:
            arg = self.parse_expr()
            if not isinstance(arg, ColumnRef):
                raise SglError(Diagnostic(
                    "UnexpectedToken",
                    f"{name}(...) takes a single column name",
                    arg.pos.line, arg.pos.col,
                ))
            args.append(arg)
        self.expect(TokenKind.RPAREN, "')'")
        return FuncCall(name, tuple(args), pos=Pos(name_tok.line, name_tok.col))

    def parse_expr_list(self, clause: str) -> tuple[Expr, ...]:
        tok = self.peek()
        if tok is None or tok.kind not in (TokenKind.IDENTIFIER, TokenKind.NUMBER, TokenKind.STRING):
            raise self.fail("EmptyClause", f"'{clause}' requires at least one expression")
        exprs = [self.parse_expr()]
        while self.peek() is not None and self.peek().kind is TokenKind.COMMA:
            self.next()
            exprs.append(self.parse_expr())
        return tuple(exprs)

    def parse_aesthetic(self) -> tuple[str, Pos]:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.IDENTIFIER and tok.lexeme.lower() in AESTHETICS:
            self.next()
            return tok.lexeme.lower(), Pos(tok.line, tok.col)
        raise self.fail(
            "UnexpectedToken",
            f"expected an aesthetic name ({', '.join(AESTHETICS)}), found {self.describe(tok)}",
        )

    # -- layer clauses -----------------------------------------------------

    def parse_mapping(self, seen: dict[str, Pos]) -> AestheticMapping:
        expr = self.parse_expr()
        self.expect_keyword("as")
        aesthetic, apos = self.parse_aesthetic()
        if aesthetic in seen:
            raise SglError(Diagnostic(
                "DuplicateAesthetic",
                f"aesthetic '{aesthetic}' is mapped more than once in this layer",
                apos.line, apos.col, len(aesthetic),
            ))
        seen[aesthetic] = apos
        return AestheticMapping(expr, aesthetic, pos=expr.pos)

    def parse_layer(self) -> LayerSpec:
        vis = self.expect_keyword("visualize")
        tok = self.peek()
        if tok is None or tok.kind not in (TokenKind.IDENTIFIER, TokenKind.NUMBER, TokenKind.STRING):
            raise self.fail(
                "UnexpectedToken",
                f"expected an aesthetic mapping after 'visualize', found {self.describe(tok)}",
            )
        seen: dict[str, Pos] = {}
        mappings = [self.parse_mapping(seen)]
        while self.peek() is not None and self.peek().kind is TokenKind.COMMA:
            self.next()
            mappings.append(self.parse_mapping(seen))

        self.expect_keyword("from")
        source = self.parse_source()

        group_by: tuple[Expr, ...] = ()
        collect_by: tuple[Expr, ...] = ()
        if self.at_keyword("group"):
            self.next()
            self.expect_keyword("by")
            group_by = self.parse_expr_list("group by")
        if self.at_keyword("collect"):
            self.next()
            self.expect_keyword("by")
            collect_by = self.parse_expr_list("collect by")
        if self.at_keyword("group"):
            raise self.fail("MisplacedClause", "'group by' must come before 'collect by'")

        self.expect_keyword("using")
        chain = self.parse_geom_chain()

        for kw in ("group", "collect"):
            if self.at_keyword(kw):
                raise self.fail("MisplacedClause", f"'{kw} by' must come before 'using'")

        return LayerSpec(
            mappings=tuple(mappings),
            source=source,
            group_by=group_by,
            collect_by=collect_by,
            geom_chain=chain,
            pos=Pos(vis.line, vis.col),
        )

    def parse_source(self) -> TableRef | Subquery:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.IDENTIFIER:
            self.next()
            return TableRef(tok.lexeme, pos=Pos(tok.line, tok.col))
        if tok is not None and tok.kind is TokenKind.LPAREN:
            lparen = self.next()
            raw = self.peek()
            if raw is None or raw.kind is not TokenKind.RAW_SQL:
                raise self.fail("UnexpectedToken", "expected a SQL subquery after 'from ('")
            self.next()
            if not str(raw.lexeme).strip():
                raise SglError(Diagnostic(
                    "EmptyClause", "subquery is empty", lparen.line, lparen.col,
                ))
            self.expect(TokenKind.RPAREN, "')'")
            return Subquery(str(raw.lexeme), pos=Pos(raw.line, raw.col))
        raise self.fail("UnexpectedToken", f"expected a table name or '(subquery)', found {self.describe(tok)}")

    def parse_geom_chain(self) -> tuple[GeomExpr, ...]:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.LPAREN:
            self.next()
            chain = [self.parse_geom_expr()]
            while self.at_keyword("layer"):
                self.next()
                chain.append(self.parse_geom_expr())
            closing = self.peek()
            if closing is None or closing.kind is not TokenKind.RPAREN:
                raise SglError(Diagnostic(
                    "UnbalancedParens",
                    "geom expression list is missing its closing ')'",
                    tok.line, tok.col,
                ))
            self.next()
            return tuple(chain)
        return (self.parse_geom_expr(),)

    def parse_geom_expr(self) -> GeomExpr:
        tok = self.peek()
        if tok is None or tok.kind in (TokenKind.SEMICOLON, TokenKind.RPAREN):
            raise self.fail("EmptyClause", "'using' requires a geom")
        qualifier: str | None = None
        qpos: Pos | None = None
        if tok.kind is TokenKind.KEYWORD and tok.value in QUALIFIER_KEYWORDS:
            qualifier = str(tok.value)
            qpos = Pos(tok.line, tok.col)
            self.next()
        geom_tok = self.peek()
        if geom_tok is not None and geom_tok.kind is TokenKind.KEYWORD and str(geom_tok.value) in _GEOM_SINGULAR:
            self.next()
            pos = qpos or Pos(geom_tok.line, geom_tok.col)
            return GeomExpr(_GEOM_SINGULAR[str(geom_tok.value)], qualifier, pos=pos)
        # an identifier right before a geom keyword reads as a bad qualifier
        if (
            geom_tok is not None
            and geom_tok.kind is TokenKind.IDENTIFIER
            and self.peek(1) is not None
            and self.peek(1).kind is TokenKind.KEYWORD
            and str(self.peek(1).value) in _GEOM_SINGULAR
        ):
            raise self.fail(
                "UnknownQualifier",
                f"unknown geom qualifier {self.describe(geom_tok)} "
                f"(supported: {', '.join(sorted(QUALIFIER_KEYWORDS))})",
            )
        raise self.fail(
            "UnknownGeom",
            f"expected a geom (points, bars, lines), found {self.describe(geom_tok)}",
        )

    # -- graphic-level clauses ----------------------------------------------

    def parse_scale_specs(self) -> tuple[ScaleSpec, ...]:
        self.expect_keyword("scale")
        self.expect_keyword("by")
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENTIFIER:
            raise self.fail("EmptyClause", "'scale by' requires at least one transform, e.g. log(x)")
        specs: list[ScaleSpec] = []
        while True:
            name_tok = self.expect(TokenKind.IDENTIFIER, "a scale transform such as log(x)")
            if name_tok.lexeme.lower() != "log":
                raise SglError(Diagnostic(
                    "UnexpectedToken",
                    f"unknown scale transform {name_tok.lexeme!r} (only 'log' is supported)",
                    name_tok.line, name_tok.col, len(name_tok.lexeme),
                ))
            self.expect(TokenKind.LPAREN, "'('")
            aesthetic, apos = self.parse_aesthetic()
            if aesthetic not in POSITIONAL_AESTHETICS:
                raise SglError(Diagnostic(
                    "UnexpectedToken",
                    f"scale transforms apply to positional aesthetics ({', '.join(POSITIONAL_AESTHETICS)})",
                    apos.line, apos.col, len(aesthetic),
                ))
            self.expect(TokenKind.RPAREN, "')'")
            specs.append(ScaleSpec("log", aesthetic, pos=Pos(name_tok.line, name_tok.col)))
            if self.peek() is not None and self.peek().kind is TokenKind.COMMA:
                self.next()
                continue
            break
        return tuple(specs)

    def parse_facet_spec(self) -> FacetSpec:
        facet_tok = self.expect_keyword("facet")
        self.expect_keyword("by")
        tok = self.peek()
        if tok is None or tok.kind not in (TokenKind.IDENTIFIER, TokenKind.NUMBER, TokenKind.STRING):
            raise self.fail("EmptyClause", "'facet by' requires at least one expression")
        exprs = [self.parse_expr()]
        orientation: str | None = None
        while True:
            if self.at_keyword("vertically", "horizontally"):
                kw = self.next()
                orientation = "vertical" if kw.value == "vertically" else "horizontal"
                break
            if self.peek() is not None and self.peek().kind is TokenKind.COMMA:
                self.next()
                exprs.append(self.parse_expr())
                continue
            break
        return FacetSpec(tuple(exprs), orientation, pos=Pos(facet_tok.line, facet_tok.col))

    def parse_title_specs(self) -> tuple[TitleSpec, ...]:
        self.expect_keyword("title")
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENTIFIER:
            raise self.fail("EmptyClause", "'title' requires at least one entry, e.g. x as 'Label'")
        specs: list[TitleSpec] = []
        while True:
            aesthetic, apos = self.parse_aesthetic()
            self.expect_keyword("as")
            text = self.expect(TokenKind.STRING, "a quoted title")
            specs.append(TitleSpec(aesthetic, str(text.value), pos=apos))
            if self.peek() is not None and self.peek().kind is TokenKind.COMMA:
                self.next()
                continue
            break
        return tuple(specs)

    # -- statement ----------------------------------------------------------

    def parse_statement(self) -> SglStatement:
        layers = [self.parse_layer()]
        while self.at_keyword("layer"):
            self.next()
            layers.append(self.parse_layer())

        scale_specs: tuple[ScaleSpec, ...] = ()
        facet_spec: FacetSpec | None = None
        title_specs: tuple[TitleSpec, ...] = ()
        if self.at_keyword("scale"):
            scale_specs = self.parse_scale_specs()
        if self.at_keyword("facet"):
            facet_spec = self.parse_facet_spec()
        if self.at_keyword("title"):
            title_specs = self.parse_title_specs()

        if self.at_keyword(*_GRAPHIC_CLAUSES):
            raise self.fail(
                "MisplacedClause",
                f"'{self.peek().lexeme.lower()}' clause is repeated or out of order "
                "(expected scale by, then facet by, then title)",
            )
        if self.at_keyword("layer"):
            raise self.fail(
                "MisplacedClause",
                "'layer' cannot follow graphic-level clauses; scale by, facet by and "
                "title must come after the final layer",
            )

        if self.peek() is not None and self.peek().kind is TokenKind.SEMICOLON:
            self.next()
        if self.peek() is not None:
            raise self.fail(
                "UnexpectedToken",
                f"expected end of statement, found {self.describe(self.peek())}",
            )
        return SglStatement(
            layers=tuple(layers),
            scale_specs=scale_specs,
            facet_spec=facet_spec,
            title_specs=title_specs,
        )


def parse(tokens: list[Token], end_pos: tuple[int, int] | None = None) -> SglStatement:
    """Parse a token stream into one SglStatement; raises SglError on failure."""
    if not tokens:
        raise SglError(Diagnostic("EmptyClause", "empty statement"))
    return _Parser(tokens, end_pos).parse_statement()


def parse_text(source: str) -> SglStatement:
    """Convenience: tokenize + parse in one step."""
    from .lexer import end_position

    return parse(tokenize(source), end_position(source))


def parse_geom_chain(tokens: list[Token]) -> tuple[GeomExpr, ...]:
    """Parse a geom expression chain as it appears after 'using'."""
    parser = _Parser(tokens)
    chain = parser.parse_geom_chain()
    if parser.peek() is not None:
        raise parser.fail("UnexpectedToken", f"unexpected {parser.describe(parser.peek())} after geom chain")
    return chain


# -- canonical formatting ---------------------------------------------------

_GEOM_PLURAL = {"point": "points", "bar": "bars", "line": "lines"}


def _geom_expr_text(g: GeomExpr) -> str:
    geom = _GEOM_PLURAL[g.geom]
    return f"{g.qualifier} {geom}" if g.qualifier else geom


def _quoted(text: str) -> str:
    return "'" + text.replace("'", "''") + "'"


def _items_block(keyword: str, items: list[str]) -> list[str]:
    lines = [keyword]
    for i, item in enumerate(items):
        sep = "," if i < len(items) - 1 else ""
        lines.append(f"  {item}{sep}")
    return lines


def unparse(stmt: SglStatement) -> str:
    """Render a statement in canonical form; parse(unparse(x)) == x structurally."""
    blocks: list[str] = []
    for layer in stmt.layers:
        lines: list[str] = []
        mapped = [f"{expr_text(m.expr)} as {m.aesthetic}" for m in layer.mappings]
        if len(mapped) == 1:
            lines.append(f"visualize {mapped[0]}")
        else:
            lines.extend(_items_block("visualize", mapped))
        if isinstance(layer.source, TableRef):
            lines.append(f"from {layer.source.name}")
        else:
            lines.append(f"from ({layer.source.sql})")
        if layer.group_by:
            lines.extend(_items_block("group by", [expr_text(e) for e in layer.group_by]))
        if layer.collect_by:
            lines.extend(_items_block("collect by", [expr_text(e) for e in layer.collect_by]))
        if len(layer.geom_chain) == 1:
            lines.append(f"using {_geom_expr_text(layer.geom_chain[0])}")
        else:
            lines.append("using (")
            for i, g in enumerate(layer.geom_chain):
                if i:
                    lines.append("  layer")
                lines.append(f"  {_geom_expr_text(g)}")
            lines.append(")")
        blocks.append("\n".join(lines))

    text = "\n\nlayer\n\n".join(blocks)
    tail: list[str] = []
    if stmt.scale_specs:
        tail.extend(_items_block(
            "scale by", [f"{s.transform}({s.aesthetic})" for s in stmt.scale_specs]
        ))
    if stmt.facet_spec is not None:
        items = [expr_text(e) for e in stmt.facet_spec.exprs]
        if stmt.facet_spec.orientation is not None:
            suffix = "vertically" if stmt.facet_spec.orientation == "vertical" else "horizontally"
            items[-1] = f"{items[-1]} {suffix}"
        tail.extend(_items_block("facet by", items))
    if stmt.title_specs:
        tail.extend(_items_block(
            "title", [f"{t.aesthetic} as {_quoted(t.title)}" for t in stmt.title_specs],
        ))
    if tail:
        text += "\n" + "\n".join(tail)
    return text + ";"
