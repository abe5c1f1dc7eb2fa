"""Flat guarded state machines with bind/unbind actions over a shared store,
stepped synchronously against a single global event sequence.

Guards are conjunctions of bound(x)/unbound(x).  Bind values are literals or
references to the triggering message's arguments (`arg.<param>`).  Stepping
treats bind as an overwrite; value conflicts are the business of the
separate integrity check, which flags any rebinding of a currently-bound
variable to a different value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ._lexer import TokenStream
from .diagnostics import ParseError


@dataclass(frozen=True)
class HapnEvent:
    sender: str
    receiver: str
    name: str
    args: tuple[tuple[str, str], ...] = ()

    @classmethod
    def make(cls, sender: str, receiver: str, name: str, **args: str) -> "HapnEvent":
        return cls(sender, receiver, name, tuple(sorted((k, str(v)) for k, v in args.items())))

    def arg_map(self) -> dict[str, str]:
        return dict(self.args)


@dataclass(frozen=True)
class Guard:
    # conjunction of (variable, must_be_bound) literals; empty means true
    literals: tuple[tuple[str, bool], ...] = ()

    def holds(self, store: dict[str, str]) -> bool:
        return all((var in store) == positive for var, positive in self.literals)

    def __str__(self) -> str:
        if not self.literals:
            return "true"
        return " and ".join(f"{'bound' if pos else 'unbound'}({v})" for v, pos in self.literals)


@dataclass(frozen=True)
class Action:
    kind: str  # "bind" | "unbind"
    var: str
    value: str | None = None  # literal, or "arg.<param>" reference; None for unbind

    def __str__(self) -> str:
        if self.kind == "unbind":
            return f"unbind({self.var})"
        value = self.value if self.value and self.value.startswith("arg.") else f'"{self.value}"'
        return f"bind({self.var}, {value})"


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    label: tuple[str, str, str] | None  # (sender, receiver, name); None for epsilon
    message_params: tuple[str, ...] = ()
    guard: Guard = Guard()
    actions: tuple[Action, ...] = ()


@dataclass(frozen=True)
class HapnMachine:
    name: str
    states: tuple[str, ...]
    initial: str
    finals: tuple[str, ...]
    variables: tuple[str, ...]
    transitions: tuple[Transition, ...]


@dataclass(frozen=True)
class HapnConfigState:
    state: str
    store: tuple[tuple[str, str], ...] = ()

    def store_map(self) -> dict[str, str]:
        return dict(self.store)


class NoTransition(Exception):
    pass


def _apply_actions(store: dict[str, str], actions: tuple[Action, ...], event: HapnEvent | None) -> dict[str, str]:
    out = dict(store)
    for action in actions:
        if action.kind == "unbind":
            out.pop(action.var, None)
        else:
            out[action.var] = _resolve(action.value, event)
    return out


def _resolve(value: str | None, event: HapnEvent | None) -> str:
    if value is None:
        raise ValueError("bind without a value")
    if value.startswith("arg."):
        if event is None:
            raise ValueError("arg reference on a message-less transition")
        param = value[4:]
        args = event.arg_map()
        if param not in args:
            raise ValueError(f"event {event.name} has no argument {param!r}")
        return args[param]
    return value


def step_hapn(c: HapnConfigState, m: HapnMachine, ev: HapnEvent | None) -> tuple[HapnConfigState, ...]:
    """All successor configurations for a message event (or epsilon when
    ev is None), with guards evaluated against the shared store and actions
    applied atomically."""
    store = c.store_map()
    out = []
    for t in m.transitions:
        if t.source != c.state:
            continue
        if ev is None:
            if t.label is not None:
                continue
        else:
            if t.label != (ev.sender, ev.receiver, ev.name):
                continue
        if not t.guard.holds(store):
            continue
        new_store = _apply_actions(store, t.actions, ev)
        out.append(HapnConfigState(t.target, tuple(sorted(new_store.items()))))
    if not out:
        raise NoTransition(f"no transition from {c.state} on {ev.name if ev else 'epsilon'}")
    return tuple(out)


def _eps_closure(m: HapnMachine, configs: set[HapnConfigState]) -> set[HapnConfigState]:
    seen = set(configs)
    stack = list(configs)
    while stack:
        c = stack.pop()
        try:
            successors = step_hapn(c, m, None)
        except NoTransition:
            continue
        for nxt in successors:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def runs(m: HapnMachine, enactment: list[HapnEvent]) -> list[tuple[HapnConfigState, list[tuple[Transition, HapnEvent | None, dict[str, str]]]]]:
    """All runs over the synchronous event sequence, interleaving epsilon
    steps; each run carries its taken transitions for inspection."""
    initial = HapnConfigState(m.initial)
    frontier: list[tuple[HapnConfigState, list]] = [(initial, [])]
    frontier = _close(m, frontier)
    for ev in enactment:
        nxt: list[tuple[HapnConfigState, list]] = []
        for config, path in frontier:
            try:
                successors = step_hapn(config, m, ev)
            except NoTransition:
                continue
            for s in successors:
                nxt.append((s, path + [(None, ev, s.store_map())]))
        frontier = _close(m, nxt)
        if not frontier:
            return []
    return frontier


def _close(m: HapnMachine, frontier: list) -> list:
    out = list(frontier)
    seen = {c for c, _ in frontier}
    stack = list(frontier)
    while stack:
        config, path = stack.pop()
        try:
            successors = step_hapn(config, m, None)
        except NoTransition:
            continue
        for s in successors:
            if s not in seen:
                seen.add(s)
                item = (s, path + [(None, None, s.store_map())])
                out.append(item)
                stack.append(item)
    return out


def accepts(m: HapnMachine, enactment: list[HapnEvent]) -> bool:
    """True iff some run over the sequence ends in a final state."""
    return any(config.state in m.finals for config, _ in runs(m, enactment))


def conforms(m: HapnMachine, enactment: list[HapnEvent]) -> bool:
    """True iff some run consumes the whole sequence (no final-state demand)."""
    return bool(runs(m, enactment))


@dataclass(frozen=True)
class BindConflict:
    variable: str
    old: str
    new: str
    event: str | None

    def __str__(self) -> str:
        return f"variable {self.variable} rebound from {self.old!r} to {self.new!r} by {self.event or 'epsilon'}"


def hapn_integrity_check(m: HapnMachine, enactment: list[HapnEvent]) -> BindConflict | None:
    """Report a conflict iff every run that consumes the enactment rebinds a
    currently-bound variable to a different value somewhere; unbinding first
    makes rebinding legal."""
    completed = _integrity_runs(m, enactment)
    if not completed:
        raise NoTransition("no run consumes the enactment")
    clean = [conflicts for conflicts in completed if not conflicts]
    if clean:
        return None
    first = min(completed, key=len)
    return first[0]


def _integrity_runs(m: HapnMachine, enactment: list[HapnEvent]) -> list[list[BindConflict]]:
    # track (config, conflicts) pairs through message and epsilon steps
    start = (HapnConfigState(m.initial), ())
    frontier = _integrity_close(m, {start})
    for ev in enactment:
        nxt = set()
        for config, conflicts in frontier:
            for t, s in _integrity_steps(m, config, ev):
                nxt.add((s, conflicts + _bind_conflicts(config, t, ev)))
        frontier = _integrity_close(m, nxt)
        if not frontier:
            return []
    return [list(conflicts) for _, conflicts in frontier]


def _integrity_close(m: HapnMachine, frontier: set) -> set:
    seen = set(frontier)
    stack = list(frontier)
    while stack:
        config, conflicts = stack.pop()
        for t, s in _integrity_steps(m, config, None):
            item = (s, conflicts + _bind_conflicts(config, t, None))
            if item not in seen:
                seen.add(item)
                stack.append(item)
    return seen


def _integrity_steps(m: HapnMachine, c: HapnConfigState, ev: HapnEvent | None):
    store = c.store_map()
    for t in m.transitions:
        if t.source != c.state:
            continue
        if ev is None and t.label is not None:
            continue
        if ev is not None and t.label != (ev.sender, ev.receiver, ev.name):
            continue
        if not t.guard.holds(store):
            continue
        yield t, HapnConfigState(t.target, tuple(sorted(_apply_actions(store, t.actions, ev).items())))


def _bind_conflicts(c: HapnConfigState, t: Transition, ev: HapnEvent | None) -> tuple[BindConflict, ...]:
    store = c.store_map()
    out = []
    for action in t.actions:
        if action.kind == "unbind":
            store.pop(action.var, None)
            continue
        value = _resolve(action.value, ev)
        if action.var in store and store[action.var] != value:
            out.append(BindConflict(action.var, store[action.var], value, ev.name if ev else None))
        store[action.var] = value
    return tuple(out)


# ---------------------------------------------------------------------------
# text format


def parse_hapn(text: str) -> HapnMachine:
    ts = TokenStream(text)
    name = "machine"
    states: list[str] = []
    initial: str | None = None
    finals: list[str] = []
    variables: list[str] = []
    transitions: list[Transition] = []
    while not ts.done():
        tok = ts.expect_kind("id")
        if tok.text == "machine":
            name = ts.expect_kind("id").text
        elif tok.text == "var":
            while True:
                variables.append(ts.expect_kind("id").text)
                if not ts.maybe(","):
                    break
        elif tok.text == "state":
            sname = ts.expect_kind("id").text
            if sname in states:
                raise ParseError(f"duplicate state {sname!r}", tok.line, tok.column)
            states.append(sname)
            while ts.at("initial") or ts.at("final"):
                mark = ts.next().text
                if mark == "initial":
                    if initial is not None:
                        raise ParseError("two initial states", tok.line, tok.column)
                    initial = sname
                else:
                    finals.append(sname)
        elif tok.text == "trans":
            transitions.append(_parse_transition(ts))
        else:
            raise ParseError(f"unexpected keyword {tok.text!r}", tok.line, tok.column)
        ts.maybe(";")
    if initial is None:
        raise ParseError("no initial state", 1, 1)
    for t in transitions:
        for s in (t.source, t.target):
            if s not in states:
                raise ParseError(f"transition uses undeclared state {s!r}", 1, 1)
    return HapnMachine(name, tuple(states), initial, tuple(finals), tuple(variables), tuple(transitions))


def _parse_transition(ts: TokenStream) -> Transition:
    source = ts.expect_kind("id").text
    ts.expect("->")
    target = ts.expect_kind("id").text
    label = None
    params: tuple[str, ...] = ()
    if ts.at("on"):
        ts.next()
        sender = ts.expect_kind("id").text
        ts.expect("->")
        receiver = ts.expect_kind("id").text
        ts.expect(":")
        mname = ts.expect_kind("id").text
        plist: list[str] = []
        ts.expect("(")
        while not ts.at(")"):
            plist.append(ts.expect_kind("id").text)
            if not ts.at(")"):
                ts.expect(",")
        ts.expect(")")
        label = (sender, receiver, mname)
        params = tuple(plist)
    guard = Guard()
    if ts.at("when"):
        ts.next()
        guard = _parse_guard(ts)
    actions: list[Action] = []
    if ts.at("do"):
        ts.next()
        while True:
            actions.append(_parse_action(ts))
            if not ts.maybe(","):
                break
    return Transition(source, target, label, params, guard, tuple(actions))


def _parse_guard(ts: TokenStream) -> Guard:
    literals: list[tuple[str, bool]] = []
    while True:
        tok = ts.expect_kind("id")
        if tok.text == "true":
            pass
        elif tok.text in ("bound", "unbound"):
            ts.expect("(")
            var = ts.expect_kind("id").text
            ts.expect(")")
            literals.append((var, tok.text == "bound"))
        else:
            raise ParseError(f"expected guard literal, found {tok.text!r}", tok.line, tok.column)
        if ts.at("and"):
            ts.next()
            continue
        break
    return Guard(tuple(literals))


def _parse_action(ts: TokenStream) -> Action:
    tok = ts.expect_kind("id")
    if tok.text == "unbind":
        ts.expect("(")
        var = ts.expect_kind("id").text
        ts.expect(")")
        return Action("unbind", var)
    if tok.text != "bind":
        raise ParseError(f"expected bind or unbind, found {tok.text!r}", tok.line, tok.column)
    ts.expect("(")
    var = ts.expect_kind("id").text
    ts.expect(",")
    if ts.at_kind("string"):
        value = ts.next().text.strip('"')
    else:
        value = ts.expect_kind("id").text
        if value == "arg":
            ts.expect(".")
            value = "arg." + ts.expect_kind("id").text
    ts.expect(")")
    return Action("bind", var, value)


def print_hapn(m: HapnMachine) -> str:
    lines = [f"machine {m.name}"]
    if m.variables:
        lines.append("var " + ", ".join(m.variables))
    for s in m.states:
        marks = ""
        if s == m.initial:
            marks += " initial"
        if s in m.finals:
            marks += " final"
        lines.append(f"state {s}{marks}")
    for t in m.transitions:
        text = f"trans {t.source} -> {t.target}"
        if t.label:
            sender, receiver, mname = t.label
            text += f" on {sender} -> {receiver} : {mname}({', '.join(t.message_params)})"
        if t.guard.literals:
            text += f" when {t.guard}"
        if t.actions:
            text += " do " + ", ".join(str(a) for a in t.actions)
        lines.append(text)
    return "\n".join(lines) + "\n"
