"""Parser for the concrete formula grammar.

Precedence, loosest to tightest: ``->`` (right-assoc), ``|``, ``&``,
``U`` (right-assoc), unary (``!``, ``G``, ``F``, ``X``).  Parentheses
override.  Unicode aliases are accepted for every operator so that the
symbolic rendering parses back.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ast import (
    FALSE,
    TRUE,
    And,
    Always,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Prop,
    Until,
)


class ParseError(ValueError):
    """Syntax error with position and the set of tokens that were expected."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += f" (expected one of: {', '.join(expected)})"
        super().__init__(detail)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_SYMBOLS = [
    ("->", "IMPLIES"),
    ("→", "IMPLIES"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("!", "NOT"),
    ("¬", "NOT"),
    ("&", "AND"),
    ("∧", "AND"),
    ("|", "OR"),
    ("∨", "OR"),
    ("□", "ALWAYS"),
    ("◇", "EVENTUALLY"),
    ("○", "NEXT"),
]

_KEYWORDS = {
    "true": "TRUE",
    "false": "FALSE",
    "G": "ALWAYS",
    "F": "EVENTUALLY",
    "X": "NEXT",
    "U": "UNTIL",
}

_IDENT = re.compile(r"[A-Za-z0-9_]+")

_ATOM_EXPECTED = ("identifier", "'true'", "'false'", "'('", "'!'", "'G'", "'F'", "'X'")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        for sym, kind in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(kind, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            m = _IDENT.match(text, i)
            if m:
                word = m.group()
                kind = _KEYWORDS.get(word, "IDENT")
                tokens.append(Token(kind, word, line, col))
                i = m.end()
                col += len(word)
            else:
                raise ParseError(f"unknown operator or character {ch!r}", line, col)
    end_col = col
    tokens.append(Token("EOF", "", line, end_col))
    return tokens


@dataclass
class _Parser:
    tokens: list[Token]
    pos: int = field(default=0)

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, literal: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"unexpected {tok.text!r}" if tok.kind != "EOF" else "unexpected end of input",
                tok.line,
                tok.column,
                expected=(literal,),
            )
        return self.advance()

    def parse_formula(self) -> Formula:
        return self.parse_implies()

    def parse_implies(self) -> Formula:
        left = self.parse_or()
        if self.peek().kind == "IMPLIES":
            self.advance()
            right = self.parse_implies()
            return Implies(left, right)
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        if self.peek().kind == "OR":
            self.advance()
            right = self.parse_or()
            return Or(left, right)
        return left

    def parse_and(self) -> Formula:
        left = self.parse_until()
        if self.peek().kind == "AND":
            self.advance()
            right = self.parse_and()
            return And(left, right)
        return left

    def parse_until(self) -> Formula:
        left = self.parse_unary()
        if self.peek().kind == "UNTIL":
            self.advance()
            right = self.parse_until()
            return Until(left, right)
        return left

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "NOT":
            self.advance()
            return Not(self.parse_unary())
        if tok.kind == "ALWAYS":
            self.advance()
            return Always(self.parse_unary())
        if tok.kind == "EVENTUALLY":
            self.advance()
            return Eventually(self.parse_unary())
        if tok.kind == "NEXT":
            self.advance()
            return Next(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "TRUE":
            self.advance()
            return TRUE
        if tok.kind == "FALSE":
            self.advance()
            return FALSE
        if tok.kind == "IDENT":
            self.advance()
            return Prop(tok.text)
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_implies()
            closing = self.peek()
            if closing.kind != "RPAREN":
                raise ParseError(
                    "unbalanced parentheses",
                    closing.line,
                    closing.column,
                    expected=("')'",),
                )
            self.advance()
            return inner
        raise ParseError(
            f"unexpected {tok.text!r}" if tok.kind != "EOF" else "unexpected end of input",
            tok.line,
            tok.column,
            expected=_ATOM_EXPECTED,
        )


def parse(text: str) -> Formula:
    """Parse a formula string into its AST.

    Raises ParseError with line/column positioning on bad input.
    """
    parser = _Parser(tokenize(text))
    phi = parser.parse_formula()
    trailing = parser.peek()
    if trailing.kind != "EOF":
        if trailing.kind == "RPAREN":
            raise ParseError("unbalanced parentheses", trailing.line, trailing.column)
        raise ParseError(
            f"unexpected {trailing.text!r} after formula",
            trailing.line,
            trailing.column,
        )
    return phi
