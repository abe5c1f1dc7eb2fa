"""Parser for the ASCII trace-expression syntax (.trace files).

Grammar, loosest to tightest: shuffle `/\\` (or `|`), choice `\\/`,
sequence `;` (right-associative), then atoms `A -> B : Msg(sig)`,
parenthesized groups, `eps`, Kleene star suffix `*`, and recursion
variables.  Named definitions `P = expr` precede the root expression;
a definition may reference itself (recursion) or earlier definitions
(inlined).  The final definition doubles as the root when no trailing
expression is present.
"""

from __future__ import annotations

from .._lexer import TokenStream
from ..diagnostics import ParseError
from .ast import Atom, CfpExpr, Choice, Epsilon, Rec, Seq, Shuffle, Var


def parse_trace(text: str) -> CfpExpr:
    parser = _TraceParser(text)
    return parser.parse()


class _TraceParser:
    def __init__(self, text: str):
        self.ts = TokenStream(text)
        self.defs: dict[str, CfpExpr] = {}
        self.star_count = 0

    def parse(self) -> CfpExpr:
        root: CfpExpr | None = None
        order: list[str] = []
        while not self.ts.done():
            if self._at_definition():
                name = self.ts.next().text
                self.ts.expect("=")
                body = self._shuffle(bound={name})
                self.defs[name] = Rec(name, body) if self._uses(body, name) else body
                order.append(name)
            else:
                if root is not None:
                    tok = self.ts.peek()
                    raise ParseError("multiple root expressions", tok.line, tok.column)
                root = self._shuffle(bound=set())
        if root is None:
            if not order:
                raise ParseError("empty trace expression", 1, 1)
            root = self.defs[order[-1]]
        return root

    def _at_definition(self) -> bool:
        tok = self.ts.peek()
        nxt = self.ts.tokens[self.ts.index + 1] if self.ts.index + 1 < len(self.ts.tokens) else None
        return tok is not None and tok.kind == "id" and nxt is not None and nxt.text == "="

    @staticmethod
    def _uses(e: CfpExpr, name: str) -> bool:
        if isinstance(e, Var):
            return e.var == name
        if isinstance(e, (Seq, Shuffle)):
            return _TraceParser._uses(e.left, name) or _TraceParser._uses(e.right, name)
        if isinstance(e, Choice):
            return any(_TraceParser._uses(b, name) for b in e.branches)
        if isinstance(e, Rec):
            return e.var != name and _TraceParser._uses(e.body, name)
        return False

    # precedence: shuffle < choice < seq
    def _shuffle(self, bound: set[str]) -> CfpExpr:
        left = self._choice(bound)
        while self.ts.at_kind("shuffle"):
            self.ts.next()
            left = Shuffle(left, self._choice(bound))
        return left

    def _choice(self, bound: set[str]) -> CfpExpr:
        branches = [self._seq(bound)]
        while self.ts.at_kind("choice"):
            self.ts.next()
            branches.append(self._seq(bound))
        if len(branches) == 1:
            return branches[0]
        deduped: list[CfpExpr] = []
        for b in branches:
            if b not in deduped:
                deduped.append(b)
        return deduped[0] if len(deduped) == 1 else Choice(tuple(deduped))

    def _seq(self, bound: set[str]) -> CfpExpr:
        left = self._postfix(bound)
        if self.ts.maybe(";"):
            return Seq(left, self._seq(bound))
        return left

    def _postfix(self, bound: set[str]) -> CfpExpr:
        e = self._primary(bound)
        while self.ts.at("*"):
            self.ts.next()
            var = f"_star{self.star_count}"
            self.star_count += 1
            e = Rec(var, Choice((Seq(e, Var(var)), Epsilon()), None))
        return e

    def _primary(self, bound: set[str]) -> CfpExpr:
        if self.ts.maybe("("):
            e = self._shuffle(bound)
            self.ts.expect(")")
            return e
        tok = self.ts.expect_kind("id")
        if tok.text == "eps":
            return Epsilon()
        if tok.text == "rec" and self.ts.at_kind("id"):
            var = self.ts.expect_kind("id").text
            self.ts.expect("(")
            body = self._shuffle(bound | {var})
            self.ts.expect(")")
            return Rec(var, body)
        if self.ts.at("->"):
            return self._atom_tail(tok.text)
        if tok.text in bound:
            return Var(tok.text)
        if tok.text in self.defs:
            return self.defs[tok.text]
        raise ParseError(f"unbound recursion variable {tok.text!r}", tok.line, tok.column)

    def _atom_tail(self, sender: str) -> CfpExpr:
        self.ts.expect("->")
        receiver = self.ts.expect_kind("id").text
        self.ts.expect(":")
        name = self.ts.expect_kind("id").text
        payload: list[tuple[str | None, str | None]] = []
        if self.ts.maybe("("):
            while not self.ts.at(")"):
                first = self.ts.expect_kind("id").text
                if self.ts.maybe(":"):
                    ptype = self.ts.expect_kind("id").text
                    payload.append((first, ptype))
                else:
                    payload.append((first, None))
                if not self.ts.at(")"):
                    self.ts.expect(",")
            self.ts.expect(")")
        return Atom(sender, receiver, name, tuple(payload))
