"""Type-level finite state machines extracted from local behaviors.

Labels carry peer, direction, message name, and the payload *type*
signature; parameter names and values are deliberately absent, which is
what makes these machines value-blind.
"""

from __future__ import annotations

from dataclasses import dataclass

from .projection import LAtom, LChoice, LEps, LRec, LSeq, LShuffle, LVar, LocalExpr

Label = tuple[str, str, str, tuple[str, ...]]  # (peer, direction, name, type signature)


def _label(atom: LAtom) -> Label:
    types = tuple((ptype or "?") for _, ptype in atom.payload)
    return (atom.peer, atom.direction, atom.name, types)


def format_label(label: Label) -> str:
    peer, direction, name, types = label
    sig = f"({', '.join(types)})" if types else "()"
    return f"{peer}{direction}{name}{sig}"


@dataclass(frozen=True)
class TypeLevelFsm:
    states: tuple[int, ...]
    initial: int
    finals: tuple[int, ...]
    transitions: tuple[tuple[int, Label, int], ...]

    def step(self, state: int, label: Label) -> int | None:
        for src, lab, dst in self.transitions:
            if src == state and lab == label:
                return dst
        return None

    def accepts(self, labels: list[Label]) -> bool:
        state = self.initial
        for label in labels:
            nxt = self.step(state, label)
            if nxt is None:
                return False
            state = nxt
        return state in self.finals

    def alphabet(self) -> set[Label]:
        return {lab for _, lab, _ in self.transitions}


def extract_fsm(l: LocalExpr, unroll_bound: int = 2) -> TypeLevelFsm:
    """Compile a local behavior to a deterministic type-level FSM.

    Tail recursion becomes a cycle; non-tail recursion is unrolled to the
    bound before compilation."""
    nfa = _Nfa()
    start = nfa.new_state()
    if _all_tail(l):
        end = nfa.new_state()
        _build(nfa, l, start, end, {})
        nfa.finals.add(end)
    else:
        end = nfa.new_state()
        _build(nfa, _unroll_local(l, unroll_bound, {}), start, end, {})
        nfa.finals.add(end)
    return _determinize(nfa, start)


class _Nfa:
    def __init__(self):
        self.count = 0
        self.eps: dict[int, set[int]] = {}
        self.edges: dict[int, list[tuple[Label, int]]] = {}
        self.finals: set[int] = set()

    def new_state(self) -> int:
        self.count += 1
        return self.count - 1

    def add_eps(self, a: int, b: int) -> None:
        self.eps.setdefault(a, set()).add(b)

    def add_edge(self, a: int, label: Label, b: int) -> None:
        self.edges.setdefault(a, []).append((label, b))


def _build(nfa: _Nfa, e: LocalExpr, start: int, end: int, env: dict[str, int]) -> None:
    if isinstance(e, LEps):
        nfa.add_eps(start, end)
    elif isinstance(e, LAtom):
        nfa.add_edge(start, _label(e), end)
    elif isinstance(e, LSeq):
        mid = nfa.new_state()
        _build(nfa, e.left, start, mid, env)
        _build(nfa, e.right, mid, end, env)
    elif isinstance(e, LChoice):
        for b in e.branches:
            _build(nfa, b, start, end, env)
    elif isinstance(e, LShuffle):
        # type-level interleavings: expand to explicit alternation
        for variant in _shuffle_variants(e):
            _build(nfa, variant, start, end, env)
    elif isinstance(e, LRec):
        entry = nfa.new_state()
        nfa.add_eps(start, entry)
        _build(nfa, e.body, entry, end, {**env, e.var: entry})
    elif isinstance(e, LVar):
        nfa.add_eps(start, env[e.var])
    else:
        raise TypeError(type(e))


def _shuffle_variants(e: LShuffle) -> list[LocalExpr]:
    lefts = _linearize(e.left)
    rights = _linearize(e.right)
    out: list[LocalExpr] = []
    for l in lefts:
        for r in rights:
            for merged in _interleave(l, r):
                expr: LocalExpr = LEps()
                for atom in reversed(merged):
                    expr = atom if isinstance(expr, LEps) else LSeq(atom, expr)
                if expr not in out:
                    out.append(expr)
    return out


def _linearize(e: LocalExpr) -> list[tuple[LAtom, ...]]:
    if isinstance(e, LEps):
        return [()]
    if isinstance(e, LAtom):
        return [(e,)]
    if isinstance(e, LSeq):
        return [l + r for l in _linearize(e.left) for r in _linearize(e.right)]
    if isinstance(e, LChoice):
        out = []
        for b in e.branches:
            out.extend(_linearize(b))
        return out
    if isinstance(e, LShuffle):
        out = []
        for l in _linearize(e.left):
            for r in _linearize(e.right):
                out.extend(_interleave(l, r))
        return out
    raise TypeError(f"cannot linearize {type(e).__name__} inside a shuffle")


def _interleave(a: tuple, b: tuple):
    if not a:
        return [b]
    if not b:
        return [a]
    return [(a[0],) + rest for rest in _interleave(a[1:], b)] + [(b[0],) + rest for rest in _interleave(a, b[1:])]


def _all_tail(e: LocalExpr) -> bool:
    """True when every recursion variable occurs only in tail position."""

    def walk(e: LocalExpr, tail: bool) -> bool:
        if isinstance(e, LVar):
            return tail
        if isinstance(e, LSeq):
            return walk(e.left, False) and walk(e.right, tail)
        if isinstance(e, LChoice):
            return all(walk(b, tail) for b in e.branches)
        if isinstance(e, LShuffle):
            return walk(e.left, False) and walk(e.right, False)
        if isinstance(e, LRec):
            return walk(e.body, tail)
        return True

    return walk(e, True)


def _unroll_local(e: LocalExpr, bound: int, env: dict[str, tuple[LRec, int]]) -> LocalExpr:
    if isinstance(e, LRec):
        if bound <= 0:
            return LEps()
        return _unroll_local(e.body, bound, {**env, e.var: (e, bound - 1)})
    if isinstance(e, LVar):
        rec, budget = env[e.var]
        if budget <= 0:
            return LEps()
        return _unroll_local(rec.body, bound, {**env, e.var: (rec, budget - 1)})
    if isinstance(e, LSeq):
        return LSeq(_unroll_local(e.left, bound, env), _unroll_local(e.right, bound, env))
    if isinstance(e, LShuffle):
        return LShuffle(_unroll_local(e.left, bound, env), _unroll_local(e.right, bound, env))
    if isinstance(e, LChoice):
        return LChoice(tuple(_unroll_local(b, bound, env) for b in e.branches), e.kind, e.lean)
    return e


def _determinize(nfa: _Nfa, start: int) -> TypeLevelFsm:
    def closure(states: frozenset[int]) -> frozenset[int]:
        stack, seen = list(states), set(states)
        while stack:
            s = stack.pop()
            for t in nfa.eps.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    initial = closure(frozenset([start]))
    subsets: dict[frozenset[int], int] = {initial: 0}
    order = [initial]
    transitions: list[tuple[int, Label, int]] = []
    i = 0
    while i < len(order):
        subset = order[i]
        by_label: dict[Label, set[int]] = {}
        for s in subset:
            for label, t in nfa.edges.get(s, ()):
                by_label.setdefault(label, set()).add(t)
        for label in sorted(by_label):
            target = closure(frozenset(by_label[label]))
            if target not in subsets:
                subsets[target] = len(order)
                order.append(target)
            transitions.append((subsets[subset], label, subsets[target]))
        i += 1
    finals = tuple(sorted(subsets[s] for s in order if s & nfa.finals))
    fsm = TypeLevelFsm(tuple(range(len(order))), 0, finals, tuple(sorted(transitions)))
    return _minimize(fsm)


def _minimize(fsm: TypeLevelFsm) -> TypeLevelFsm:
    """Hopcroft-style partition refinement (small machines only)."""
    labels = sorted(fsm.alphabet())
    finals = set(fsm.finals)
    partition = {s: (s in finals) for s in fsm.states}
    changed = True
    while changed:
        changed = False
        signature = {}
        for s in fsm.states:
            signature[s] = (partition[s], tuple(partition.get(fsm.step(s, lab), None) for lab in labels))
        blocks: dict[tuple, list[int]] = {}
        for s in fsm.states:
            blocks.setdefault(signature[s], []).append(s)
        new_partition = {}
        for i, key in enumerate(sorted(blocks, key=lambda k: min(blocks[k]))):
            for s in blocks[key]:
                new_partition[s] = i
        if new_partition != partition:
            partition = new_partition
            changed = True
    remap = {}
    for s in fsm.states:
        remap.setdefault(partition[s], partition[s])
    transitions = sorted({(partition[a], lab, partition[b]) for a, lab, b in fsm.transitions})
    states = tuple(sorted(set(partition.values())))
    finals2 = tuple(sorted({partition[s] for s in fsm.finals}))
    return TypeLevelFsm(states, partition[fsm.initial], finals2, tuple(transitions))


def export_fsm(fsm: TypeLevelFsm) -> str:
    """Graph text form for golden-file comparison: one node or edge per line."""
    lines = []
    for s in fsm.states:
        marks = []
        if s == fsm.initial:
            marks.append("initial")
        if s in fsm.finals:
            marks.append("final")
        lines.append(f"node {s}" + (" " + " ".join(marks) if marks else ""))
    for a, label, b in fsm.transitions:
        lines.append(f"edge {a} -> {b} {format_label(label)}")
    return "\n".join(lines) + "\n"
