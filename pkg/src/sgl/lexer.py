"""Tokenizer for SGL statements.

SQL subquery bodies after ``from (`` are captured as single opaque RawSql
tokens with balanced parentheses and quote awareness; everything else is
lexed against the closed SGL token alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import NamedTuple

from .diagnostics import Diagnostic, SglError


class TokenKind(Enum):
    KEYWORD = auto()
    IDENTIFIER = auto()
    NUMBER = auto()
    STRING = auto()
    COMMA = auto()
    LPAREN = auto()
    RPAREN = auto()
    STAR = auto()
    SEMICOLON = auto()
    RAW_SQL = auto()


CLAUSE_KEYWORDS = frozenset({
    "visualize", "from", "using", "group", "collect", "scale", "facet",
    "title", "by", "as", "layer", "vertically", "horizontally",
})
GEOM_KEYWORDS = frozenset({"point", "points", "bar", "bars", "line", "lines"})
QUALIFIER_KEYWORDS = frozenset({"regression", "jittered", "unstacked", "stacked"})
KEYWORDS = CLAUSE_KEYWORDS | GEOM_KEYWORDS | QUALIFIER_KEYWORDS

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_SINGLE_CHARS = {
    ",": TokenKind.COMMA,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    "*": TokenKind.STAR,
    ";": TokenKind.SEMICOLON,
}


@dataclass(frozen=True)
class Token:
    """One lexed token; (line, col) point at the first character of lexeme."""

    kind: TokenKind
    lexeme: str
    line: int
    col: int
    # Lowercased keyword name for KEYWORD tokens, unescaped text for STRING,
    # numeric value for NUMBER. Not part of token identity.
    value: object = field(default=None, compare=False)

    @property
    def keyword(self) -> str | None:
        return self.value if self.kind is TokenKind.KEYWORD else None


class RawSqlCapture(NamedTuple):
    token: Token
    end: int
    end_line: int
    end_col: int


def capture_raw_sql(source: str, start: int, line: int = 1, col: int = 1) -> RawSqlCapture:
    """Capture subquery text from `start` (just past the opening paren) to its match.

    Parentheses are balanced; single- and double-quoted SQL regions are
    respected. The returned lexeme excludes the outer parentheses and any
    leading/trailing whitespace; `end` indexes just past the matching ')'.
    """
    i = start
    cur_line, cur_col = line, col
    depth = 1
    tok_line, tok_col = line, col
    seen_content = False
    n = len(source)
    while i < n:
        ch = source[i]
        if not seen_content and not ch.isspace():
            seen_content = True
            tok_line, tok_col = cur_line, cur_col
        if ch in "'\"":
            quote = ch
            i += 1
            cur_col += 1
            while i < n:
                if source[i] == "\n":
                    cur_line += 1
                    cur_col = 1
                    i += 1
                    continue
                if source[i] == quote:
                    # doubled quote is an escape inside SQL
                    if i + 1 < n and source[i + 1] == quote:
                        i += 2
                        cur_col += 2
                        continue
                    i += 1
                    cur_col += 1
                    break
                i += 1
                cur_col += 1
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                text = source[start:i].strip()
                return RawSqlCapture(
                    Token(TokenKind.RAW_SQL, text, tok_line, tok_col, value=text),
                    i + 1, cur_line, cur_col + 1,
                )
        if ch == "\n":
            cur_line += 1
            cur_col = 1
        else:
            cur_col += 1
        i += 1
    open_line, open_col = line, max(col - 1, 1)
    raise SglError(Diagnostic(
        "UnbalancedParens",
        "subquery is missing its closing ')'",
        open_line, open_col,
    ))


class _Lexer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def error(self, code: str, message: str, line: int | None = None, col: int | None = None) -> SglError:
        return SglError(Diagnostic(code, message, line or self.line, col or self.col))

    def advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.source[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def peek(self) -> str:
        return self.source[self.pos] if self.pos < len(self.source) else ""

    def skip_trivia(self) -> None:
        while self.pos < len(self.source):
            ch = self.source[self.pos]
            if ch.isspace():
                self.advance()
            elif ch == "-" and self.source.startswith("--", self.pos):
                while self.pos < len(self.source) and self.source[self.pos] != "\n":
                    self.advance()
            else:
                return

    def emit(self, kind: TokenKind, lexeme: str, line: int, col: int, value: object = None) -> None:
        self.tokens.append(Token(kind, lexeme, line, col, value=value))

    def lex_string(self) -> None:
        line, col = self.line, self.col
        start = self.pos
        self.advance()  # opening quote
        chars: list[str] = []
        while self.pos < len(self.source):
            ch = self.source[self.pos]
            if ch == "'":
                if self.source.startswith("''", self.pos):
                    chars.append("'")
                    self.advance(2)
                    continue
                self.advance()
                lexeme = self.source[start:self.pos]
                self.emit(TokenKind.STRING, lexeme, line, col, value="".join(chars))
                return
            chars.append(ch)
            self.advance()
        raise self.error("UnterminatedString", "string literal is missing its closing quote", line, col)

    def lex_number(self) -> None:
        line, col = self.line, self.col
        start = self.pos
        while self.peek().isdigit():
            self.advance()
        if self.peek() == "." and self.pos + 1 < len(self.source) and self.source[self.pos + 1].isdigit():
            self.advance()
            while self.peek().isdigit():
                self.advance()
        lexeme = self.source[start:self.pos]
        value = float(lexeme) if "." in lexeme else int(lexeme)
        self.emit(TokenKind.NUMBER, lexeme, line, col, value=value)

    def lex_word(self) -> None:
        line, col = self.line, self.col
        start = self.pos
        while self.peek() in _IDENT_CONT:
            self.advance()
        lexeme = self.source[start:self.pos]
        lowered = lexeme.lower()
        if lowered in KEYWORDS:
            self.emit(TokenKind.KEYWORD, lexeme, line, col, value=lowered)
        else:
            self.emit(TokenKind.IDENTIFIER, lexeme, line, col, value=lexeme)

    def run(self) -> list[Token]:
        while True:
            self.skip_trivia()
            if self.pos >= len(self.source):
                return self.tokens
            ch = self.peek()
            if ch == "(" and self.tokens and self.tokens[-1].keyword == "from":
                line, col = self.line, self.col
                self.emit(TokenKind.LPAREN, "(", line, col)
                self.advance()
                captured = capture_raw_sql(self.source, self.pos, self.line, self.col)
                self.tokens.append(captured.token)
                self.emit(TokenKind.RPAREN, ")", captured.end_line, captured.end_col - 1)
                self.pos = captured.end
                self.line = captured.end_line
                self.col = captured.end_col
            elif ch in _SINGLE_CHARS:
                self.emit(_SINGLE_CHARS[ch], ch, self.line, self.col)
                self.advance()
            elif ch == "'":
                self.lex_string()
            elif ch.isdigit():
                self.lex_number()
            elif ch in _IDENT_START:
                self.lex_word()
            else:
                raise self.error("IllegalCharacter", f"character {ch!r} is not part of the language")


def tokenize(source: str) -> list[Token]:
    """Lex `source` into tokens; raises SglError with a positioned diagnostic."""
    return _Lexer(source).run()


def end_position(source: str) -> tuple[int, int]:
    """(line, col) just past the final character; anchor for at-end diagnostics."""
    line = source.count("\n") + 1
    last_nl = source.rfind("\n")
    col = len(source) - last_nl if last_nl >= 0 else len(source) + 1
    return line, col
