"""Structural transforms: bounded recursion unrolling, occurrence tagging,
exact trace enumeration, and shuffle elimination.

Occurrences give every atom position in the (unrolled) expression a stable
identity so that executions, traces, and ordering constraints can be aligned
even when several positions carry the same message label.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    Atom,
    CfpExpr,
    Choice,
    Epsilon,
    GlobalTrace,
    Rec,
    Seq,
    Shuffle,
    Var,
    has_rec,
)

DEFAULT_UNROLL = 2


def analyze(e: CfpExpr) -> list:
    """Structural diagnostics for trace expressions.  A recursion variable
    under a shuffle is accepted but flagged: its semantics is not settled in
    the trace-expression literature."""
    from ..diagnostics import Diagnostic, Severity

    out: list = []

    def walk(node: CfpExpr, under_shuffle: bool) -> None:
        if isinstance(node, Var):
            if under_shuffle:
                out.append(
                    Diagnostic(
                        "NonstandardRecursion",
                        f"recursion variable {node.var} occurs under a shuffle; treated as bounded interleaving",
                        Severity.WARNING,
                    )
                )
        elif isinstance(node, Seq):
            walk(node.left, under_shuffle)
            walk(node.right, under_shuffle)
        elif isinstance(node, Shuffle):
            walk(node.left, True)
            walk(node.right, True)
        elif isinstance(node, Choice):
            for b in node.branches:
                walk(b, under_shuffle)
        elif isinstance(node, Rec):
            walk(node.body, under_shuffle)

    walk(e, False)
    return out


@dataclass(frozen=True)
class OccAtom:
    """An atom occurrence in an unrolled expression."""

    atom: Atom
    occ: int

    @property
    def label(self) -> tuple[str, str, str]:
        return self.atom.label

    @property
    def sender(self) -> str:
        return self.atom.sender

    @property
    def receiver(self) -> str:
        return self.atom.receiver

    @property
    def name(self) -> str:
        return self.atom.name

    def __str__(self) -> str:
        return f"{self.atom.name}#{self.occ}"


class _Counter:
    def __init__(self):
        self.n = 0

    def next(self) -> int:
        self.n += 1
        return self.n


def expand(e: CfpExpr, unroll_bound: int = DEFAULT_UNROLL) -> CfpExpr:
    """Unroll every recursion up to `unroll_bound` times and tag atoms with
    occurrence ids.  A back-reference at exhausted budget becomes Epsilon.
    The result is recursion-free, with OccAtom leaves."""
    if unroll_bound < 0:
        raise ValueError("unroll bound must be >= 0")
    return _expand(e, {}, unroll_bound, _Counter())


def _expand(e: CfpExpr, env: dict[str, tuple[Rec, int]], bound: int, counter: _Counter) -> CfpExpr:
    if isinstance(e, Epsilon):
        return e
    if isinstance(e, Atom):
        return OccAtom(e, counter.next())
    if isinstance(e, OccAtom):
        return OccAtom(e.atom, counter.next())
    if isinstance(e, Seq):
        return Seq(_expand(e.left, env, bound, counter), _expand(e.right, env, bound, counter))
    if isinstance(e, Shuffle):
        return Shuffle(_expand(e.left, env, bound, counter), _expand(e.right, env, bound, counter))
    if isinstance(e, Choice):
        return Choice(tuple(_expand(b, env, bound, counter) for b in e.branches), e.decider)
    if isinstance(e, Rec):
        # the bound counts body copies: the initial expansion uses one
        if bound <= 0:
            return Epsilon()
        return _expand(e.body, {**env, e.var: (e, bound - 1)}, bound, counter)
    if isinstance(e, Var):
        if e.var not in env:
            raise ValueError(f"unbound recursion variable {e.var!r}")
        rec, budget = env[e.var]
        if budget <= 0:
            return Epsilon()
        return _expand(rec.body, {**env, e.var: (rec, budget - 1)}, bound, counter)
    raise TypeError(type(e))


def occ_traces(expanded: CfpExpr) -> tuple[tuple[OccAtom, ...], ...]:
    """All occurrence-level traces of a recursion-free expression."""
    if isinstance(expanded, Epsilon):
        return ((),)
    if isinstance(expanded, OccAtom):
        return ((expanded,),)
    if isinstance(expanded, Atom):
        raise TypeError("expression must be expanded before enumeration")
    if isinstance(expanded, Seq):
        lefts = occ_traces(expanded.left)
        rights = occ_traces(expanded.right)
        return tuple(l + r for l in lefts for r in rights)
    if isinstance(expanded, Choice):
        out: list[tuple[OccAtom, ...]] = []
        for b in expanded.branches:
            for t in occ_traces(b):
                if t not in out:
                    out.append(t)
        return tuple(out)
    if isinstance(expanded, Shuffle):
        out = []
        for l in occ_traces(expanded.left):
            for r in occ_traces(expanded.right):
                for merged in _interleave(l, r):
                    if merged not in out:
                        out.append(merged)
        return tuple(out)
    raise TypeError(type(expanded))


def _interleave(a: tuple, b: tuple):
    if not a:
        yield b
        return
    if not b:
        yield a
        return
    for rest in _interleave(a[1:], b):
        yield (a[0],) + rest
    for rest in _interleave(a, b[1:]):
        yield (b[0],) + rest


def enumerate_traces(e: CfpExpr, unroll_bound: int = DEFAULT_UNROLL) -> tuple[GlobalTrace, ...]:
    """The exact trace set with each recursion unrolled at most
    `unroll_bound` times, in a deterministic order."""
    expanded = expand(e, unroll_bound)
    seen: dict[tuple, GlobalTrace] = {}
    for t in occ_traces(expanded):
        labels = tuple(o.label for o in t)
        if labels not in seen:
            seen[labels] = GlobalTrace(labels)
    return tuple(seen[k] for k in sorted(seen))


# ---------------------------------------------------------------------------
# shuffle elimination

_EMPTY = ("_empty",)  # sentinel for the empty language


def eliminate_shuffle(e: CfpExpr) -> CfpExpr:
    """Rewrite an expression into a shuffle-free choice of orderings with
    exactly the same bounded trace set.  Recursion is bound-expanded first.
    Also accepts occurrence-expanded expressions."""
    source = expand_plain(e) if has_rec(e) else e
    return _expand_shuffles(source)


def expand_plain(e: CfpExpr, unroll_bound: int = DEFAULT_UNROLL) -> CfpExpr:
    """Bounded unrolling without occurrence tagging."""
    return _untag(expand(e, unroll_bound))


def _untag(e: CfpExpr) -> CfpExpr:
    if isinstance(e, OccAtom):
        return e.atom
    if isinstance(e, Seq):
        return Seq(_untag(e.left), _untag(e.right))
    if isinstance(e, Shuffle):
        return Shuffle(_untag(e.left), _untag(e.right))
    if isinstance(e, Choice):
        return Choice(tuple(_untag(b) for b in e.branches), e.decider)
    return e


def _expand_shuffles(e: CfpExpr) -> CfpExpr:
    if isinstance(e, (Epsilon, Atom, OccAtom)):
        return e
    if isinstance(e, Seq):
        return _seq(_expand_shuffles(e.left), _expand_shuffles(e.right))
    if isinstance(e, Choice):
        branches = [_expand_shuffles(b) for b in e.branches]
        return _choice(branches, e.decider)
    if isinstance(e, Shuffle):
        return _expand_by_derivatives(e)
    raise TypeError(type(e))


def _expand_by_derivatives(e: CfpExpr) -> CfpExpr:
    """Brzozowski-style expansion: a shuffle equals the choice, over each
    possible first atom, of that atom followed by the residual shuffle."""
    alternatives: list[CfpExpr] = []
    for head in _first_atoms(e):
        residual = _derivative(e, head)
        if residual is _EMPTY:
            continue
        alternatives.append(_seq(head, _expand_shuffles(residual)))
    if _nullable(e):
        alternatives.append(Epsilon())
    if not alternatives:
        return Epsilon()
    return _choice(alternatives, None)


def _first_atoms(e: CfpExpr) -> list:
    """Distinct atom heads (by identity of the node) that can start a trace."""
    out: list = []

    def push(a):
        if a not in out:
            out.append(a)

    if isinstance(e, (Atom, OccAtom)):
        push(e)
    elif isinstance(e, Seq):
        for a in _first_atoms(e.left):
            push(a)
        if _nullable(e.left):
            for a in _first_atoms(e.right):
                push(a)
    elif isinstance(e, Choice):
        for b in e.branches:
            for a in _first_atoms(b):
                push(a)
    elif isinstance(e, Shuffle):
        for a in _first_atoms(e.left):
            push(a)
        for a in _first_atoms(e.right):
            push(a)
    return out


def _nullable(e: CfpExpr) -> bool:
    if isinstance(e, Epsilon):
        return True
    if isinstance(e, (Atom, OccAtom)):
        return False
    if isinstance(e, (Seq, Shuffle)):
        return _nullable(e.left) and _nullable(e.right)
    if isinstance(e, Choice):
        return any(_nullable(b) for b in e.branches)
    raise TypeError(type(e))


def _derivative(e: CfpExpr, head) -> CfpExpr | tuple:
    """The language of `e` after consuming the specific atom node `head`."""
    if isinstance(e, (Atom, OccAtom)):
        return Epsilon() if e == head else _EMPTY
    if isinstance(e, Epsilon):
        return _EMPTY
    if isinstance(e, Seq):
        first = _derivative(e.left, head)
        options: list[CfpExpr] = []
        if first is not _EMPTY:
            options.append(_seq(first, e.right))
        if _nullable(e.left):
            rest = _derivative(e.right, head)
            if rest is not _EMPTY:
                options.append(rest)
        if not options:
            return _EMPTY
        return _choice(options, None)
    if isinstance(e, Choice):
        options = [d for d in (_derivative(b, head) for b in e.branches) if d is not _EMPTY]
        if not options:
            return _EMPTY
        return _choice(options, None)
    if isinstance(e, Shuffle):
        options = []
        left = _derivative(e.left, head)
        if left is not _EMPTY:
            options.append(_shuffle(left, e.right))
        right = _derivative(e.right, head)
        if right is not _EMPTY:
            options.append(_shuffle(e.left, right))
        if not options:
            return _EMPTY
        return _choice(options, None)
    raise TypeError(type(e))


def _seq(l: CfpExpr, r: CfpExpr) -> CfpExpr:
    if isinstance(l, Epsilon):
        return r
    if isinstance(r, Epsilon):
        return l
    return Seq(l, r)


def _shuffle(l: CfpExpr, r: CfpExpr) -> CfpExpr:
    if isinstance(l, Epsilon):
        return r
    if isinstance(r, Epsilon):
        return l
    return Shuffle(l, r)


def _choice(branches: list[CfpExpr], decider: str | None) -> CfpExpr:
    flat: list[CfpExpr] = []
    for b in branches:
        if b not in flat:
            flat.append(b)
    if len(flat) == 1:
        return flat[0]
    return Choice(tuple(flat), decider)
