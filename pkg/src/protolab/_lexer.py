"""Tiny position-tracking tokenizer shared by the surface-syntax parsers.

All five file formats tokenize the same way: identifiers, punctuation,
quoted strings, `//` line comments.  Parsers consume a `TokenStream`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .diagnostics import ParseError

# Identifiers may embed + and - (protocol names like Want+WillPay or
# Deliver-Payment) but only when followed by an alphanumeric, so that
# `A->B` still lexes as `A`, `->`, `B`.
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*(?:[+\-][A-Za-z0-9_]+)*)
  | (?P<num>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<shuffle>/\\|\|)
  | (?P<choice>\\/)
  | (?P<punct>[{}()\[\],:;=*.@$+%-]|[?!])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or "ws"
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    return tokens


class TokenStream:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self) -> Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def at_kind(self, kind: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("id", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.column)
        self.index += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            return self._fail(f"expected {text!r}")
        return self.next()

    def expect_kind(self, kind: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            return self._fail(f"expected {kind}")
        return self.next()

    def maybe(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def done(self) -> bool:
        return self.index >= len(self.tokens)

    def _fail(self, message: str):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("id", "", 1, 1)
            raise ParseError(f"{message}, found end of input", last.line, last.column)
        raise ParseError(f"{message}, found {tok.text!r}", tok.line, tok.column)
