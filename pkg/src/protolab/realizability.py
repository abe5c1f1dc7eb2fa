"""Realizability of control-flow protocols under a communication
configuration.

A protocol is realizable when the roles, each acting only on its own
projection, jointly produce exactly the protocol's computations: no stuck
states, no deliveries the receiving behavior cannot accept, every completed
execution within the interpreted ordering constraints, and every global
trace actually enacted.  Under unordered delivery, a protocol that repeats
the same schema on the same channel additionally fails because receivers
consume by message type and cannot tell crossed occurrences apart, so
reordered deliveries silently cross protocol instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cfp.ast import CfpExpr, Choice, Epsilon, Rec, Seq, Shuffle, initials, roles as expr_roles
from .cfp.projection import (
    LocalExpr,
    MergeFailure,
    project_scribble,
    project_trace_c,
    project_trace_f,
)
from .cfp.transforms import DEFAULT_UNROLL, OccAtom, eliminate_shuffle, expand, occ_traces
from .diagnostics import Diagnostic
from .netsim import Delivery, Reception
from .runtime import CompositionOutcome, compose


class Interpretation(str, Enum):
    SS = "SS"
    SR = "SR"
    RS = "RS"
    RR = "RR"


class Doctrine(str, Enum):
    TRACE_C = "trace-c"
    TRACE_F = "trace-f"
    SCRIBBLE = "scribble"
    HAPN = "hapn"


@dataclass(frozen=True)
class CommConfig:
    delivery: Delivery | None
    reception: Reception = Reception.ANYTIME
    interpretation: Interpretation | None = None
    doctrine: Doctrine = Doctrine.TRACE_F

    def with_(self, **kw) -> "CommConfig":
        data = {
            "delivery": self.delivery,
            "reception": self.reception,
            "interpretation": self.interpretation,
            "doctrine": self.doctrine,
        }
        data.update(kw)
        return CommConfig(**data)


def language_preset(name: str) -> CommConfig:
    """Communication model presets.  The trace-expression variant with
    pluggable infrastructure leaves delivery and interpretation to the
    caller."""
    key = name.replace("-", "").replace("_", "").lower()
    if key == "tracec":
        return CommConfig(Delivery.FIFO_PAIRWISE, Reception.ANYTIME, Interpretation.RR, Doctrine.TRACE_C)
    if key == "tracef":
        return CommConfig(None, Reception.ANYTIME, None, Doctrine.TRACE_F)
    if key == "scribble":
        return CommConfig(Delivery.FIFO_PAIRWISE, Reception.BLOCKING_SELECTOR, None, Doctrine.SCRIBBLE)
    if key == "hapn":
        return CommConfig(Delivery.SYNCHRONOUS, Reception.ANYTIME, None, Doctrine.HAPN)
    raise ValueError(f"unknown language preset {name!r}")


# ---------------------------------------------------------------------------
# sequence constraints


@dataclass(frozen=True)
class Constraint:
    kind: Interpretation
    left: OccAtom
    right: OccAtom

    def events(self) -> tuple[tuple[str, int], tuple[str, int]]:
        first = "E" if self.kind in (Interpretation.SS, Interpretation.SR) else "R"
        second = "E" if self.kind in (Interpretation.SS, Interpretation.RS) else "R"
        return ((first, self.left.occ), (second, self.right.occ))

    def __str__(self) -> str:
        first = "send" if self.kind in (Interpretation.SS, Interpretation.SR) else "recv"
        second = "send" if self.kind in (Interpretation.SS, Interpretation.RS) else "recv"
        return f"{first}({self.left.atom.name}) < {second}({self.right.atom.name})"


def sequence_constraints(e: CfpExpr, interpretation: Interpretation, unroll_bound: int = DEFAULT_UNROLL) -> tuple[Constraint, ...]:
    """One ordering constraint per sequence-adjacent atom pair: for every
    sequence node, each final atom of the left operand against each initial
    atom of the right operand, typed by the interpretation."""
    expanded = e if _is_expanded(e) else expand(e, unroll_bound)
    out: list[Constraint] = []
    _collect_constraints(expanded, interpretation, out)
    return tuple(out)


def _is_expanded(e) -> bool:
    if isinstance(e, OccAtom):
        return True
    if isinstance(e, (Seq, Shuffle)):
        return _is_expanded(e.left) or _is_expanded(e.right)
    if isinstance(e, Choice):
        return any(_is_expanded(b) for b in e.branches)
    return False


def _collect_constraints(e, interpretation: Interpretation, out: list[Constraint]) -> None:
    if isinstance(e, Seq):
        for a in _occ_finals(e.left):
            for b in _occ_initials(e.right):
                out.append(Constraint(interpretation, a, b))
        _collect_constraints(e.left, interpretation, out)
        _collect_constraints(e.right, interpretation, out)
    elif isinstance(e, Shuffle):
        _collect_constraints(e.left, interpretation, out)
        _collect_constraints(e.right, interpretation, out)
    elif isinstance(e, Choice):
        for b in e.branches:
            _collect_constraints(b, interpretation, out)


def _occ_initials(e) -> tuple[OccAtom, ...]:
    if isinstance(e, OccAtom):
        return (e,)
    if isinstance(e, Epsilon):
        return ()
    if isinstance(e, Seq):
        first = _occ_initials(e.left)
        if _occ_nullable(e.left):
            first = first + _occ_initials(e.right)
        return first
    if isinstance(e, Choice):
        return tuple(a for b in e.branches for a in _occ_initials(b))
    if isinstance(e, Shuffle):
        return _occ_initials(e.left) + _occ_initials(e.right)
    raise TypeError(type(e))


def _occ_finals(e) -> tuple[OccAtom, ...]:
    if isinstance(e, OccAtom):
        return (e,)
    if isinstance(e, Epsilon):
        return ()
    if isinstance(e, Seq):
        last = _occ_finals(e.right)
        if _occ_nullable(e.right):
            last = last + _occ_finals(e.left)
        return last
    if isinstance(e, Choice):
        return tuple(a for b in e.branches for a in _occ_finals(b))
    if isinstance(e, Shuffle):
        return _occ_finals(e.left) + _occ_finals(e.right)
    raise TypeError(type(e))


def _occ_nullable(e) -> bool:
    if isinstance(e, Epsilon):
        return True
    if isinstance(e, OccAtom):
        return False
    if isinstance(e, (Seq, Shuffle)):
        return _occ_nullable(e.left) and _occ_nullable(e.right)
    if isinstance(e, Choice):
        return any(_occ_nullable(b) for b in e.branches)
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# nonlocal choice


def detect_nonlocal_choice(e: CfpExpr) -> list[Diagnostic]:
    """Choice points whose branches' first events have different senders,
    counting a shuffle as a choice over which operand moves first."""
    out: list[Diagnostic] = []
    _scan_nonlocal(e, out)
    return out


def _scan_nonlocal(e: CfpExpr, out: list[Diagnostic]) -> None:
    if isinstance(e, Choice):
        senders: set[str] = set()
        for b in e.branches:
            firsts = initials(b)
            senders.update(a.sender for a in firsts)
        if len(senders) > 1:
            out.append(
                Diagnostic(
                    "NonlocalChoice",
                    "choice branches are initiated by different roles: " + ", ".join(sorted(senders)),
                    subject=" vs ".join(sorted({f"{a.sender} sends {a.name}" for b in e.branches for a in initials(b)[:1]})),
                )
            )
        for b in e.branches:
            _scan_nonlocal(b, out)
    elif isinstance(e, Shuffle):
        left = {a.sender for a in initials(e.left)}
        right = {a.sender for a in initials(e.right)}
        if left and right and left | right != left & right and len(left | right) > 1:
            out.append(
                Diagnostic(
                    "NonlocalChoice",
                    "shuffle operands are initiated by different roles: " + ", ".join(sorted(left | right)),
                )
            )
        _scan_nonlocal(e.left, out)
        _scan_nonlocal(e.right, out)
    elif isinstance(e, Seq):
        _scan_nonlocal(e.left, out)
        _scan_nonlocal(e.right, out)
    elif isinstance(e, Rec):
        _scan_nonlocal(e.body, out)


# ---------------------------------------------------------------------------
# verdicts


class Outcome(str, Enum):
    REALIZABLE = "Realizable"
    UNREALIZABLE = "Unrealizable"
    BOUND_EXCEEDED = "BoundExceeded"


class Reason(str, Enum):
    DEADLOCK = "Deadlock"
    NONLOCAL_CHOICE = "NonlocalChoice"
    TRACE_MISMATCH = "TraceMismatch"
    ORDER_VIOLATION = "OrderViolation"
    MERGE_FAILURE = "MergeFailure"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    reasons: tuple[Reason, ...] = ()
    witness: tuple = ()
    notes: tuple[str, ...] = ()

    @property
    def realizable(self) -> bool:
        return self.outcome is Outcome.REALIZABLE

    def to_record(self, protocol_id: str, cfg: CommConfig) -> dict:
        return {
            "protocol": protocol_id,
            "config": {
                "delivery": cfg.delivery.value if cfg.delivery else None,
                "reception": cfg.reception.value,
                "interpretation": cfg.interpretation.value if cfg.interpretation else None,
                "doctrine": cfg.doctrine.value,
            },
            "outcome": self.outcome.value,
            "reasons": [r.value for r in self.reasons],
            "witness": self.witness_log(),
            "notes": list(self.notes),
        }

    def witness_log(self) -> list[str]:
        """The witness in the shared log line shape: tick, agent, kind, message."""
        lines = []
        for i, (kind, occ, sender, receiver, name) in enumerate(self.witness):
            agent = sender if kind == "E" else receiver
            lines.append(f"{i + 1} {agent} {kind} {name} occ={occ}")
        return lines


def check_realizability(e: CfpExpr, cfg: CommConfig, bound: int = DEFAULT_UNROLL, path_cap: int = 250_000) -> Verdict:
    if cfg.doctrine is Doctrine.HAPN:
        raise ValueError("state-machine protocols are checked by synchronous acceptance, not composition")
    if cfg.delivery is None:
        raise ValueError("configuration needs a delivery model (the pluggable preset leaves it to the caller)")
    if cfg.doctrine is Doctrine.TRACE_F and cfg.interpretation is None:
        raise ValueError("the pluggable preset needs a sequence interpretation")

    reasons: list[Reason] = []
    notes: list[str] = []
    witness: tuple = ()

    nonlocal_diags = detect_nonlocal_choice(e)
    if nonlocal_diags:
        reasons.append(Reason.NONLOCAL_CHOICE)
        notes.extend(d.message for d in nonlocal_diags)

    expanded = expand(e, bound)
    traces = occ_traces(expanded)
    label_traces = {tuple(o.label for o in t) for t in traces}

    # correlation ambiguity: unordered delivery cannot keep same-schema
    # occurrences on one channel apart, and type-level reception hides it
    if cfg.delivery is Delivery.UNORDERED and cfg.reception is Reception.ANYTIME:
        dup = _repeated_schema_on_channel(traces)
        if dup is not None:
            trace, label = dup
            reasons.append(Reason.ORDER_VIOLATION)
            witness = witness or tuple(("E", o.occ, *o.label) for o in trace)
            notes.append(
                f"unordered delivery can cross occurrences of {label[2]} on channel {label[0]}->{label[1]}; "
                "the receiver consumes by type and cannot detect the crossed correlation"
            )

    working = eliminate_shuffle(expanded) if cfg.doctrine in (Doctrine.TRACE_C, Doctrine.SCRIBBLE) else expanded
    try:
        behaviors = _project_all(working, cfg)
    except MergeFailure as failure:
        reasons.append(Reason.MERGE_FAILURE)
        notes.append(str(failure))
        if not witness and traces:
            witness = tuple(("E", o.occ, *o.label) for o in traces[0])
        return Verdict(Outcome.UNREALIZABLE, _order_reasons(reasons), witness, tuple(notes))

    outcome = compose(behaviors, cfg.delivery, cfg.reception, path_cap=path_cap)
    if outcome.bound_exceeded:
        return Verdict(Outcome.BOUND_EXCEEDED, (), (), ("exploration bound exceeded; inconclusive",))

    if outcome.deadlocks:
        reasons.append(Reason.DEADLOCK)
        witness = witness or outcome.deadlocks[0]
        notes.append("a reachable state has no enabled emission or delivery and is not final")
    for violation in outcome.violations:
        reasons.append(Reason.ORDER_VIOLATION)
        witness = witness or violation.events
        notes.append(f"{violation.kind}: {violation.detail}")

    constraint_note, constraint_witness = _check_constraints(expanded, cfg, outcome)
    if constraint_note:
        reasons.append(Reason.ORDER_VIOLATION)
        witness = witness or constraint_witness
        notes.append(constraint_note)

    realized = {ex.labels() for ex in outcome.completed}
    missing = sorted(label_traces - realized)
    extra = sorted(realized - label_traces)
    if (missing or extra) and not reasons:
        reasons.append(Reason.TRACE_MISMATCH)
        if missing:
            notes.append(f"{len(missing)} protocol trace(s) cannot be enacted, e.g. {_fmt_labels(missing[0])}")
        if extra:
            notes.append(f"the composition produces {len(extra)} extra trace(s), e.g. {_fmt_labels(extra[0])}")
        if extra:
            for ex in outcome.completed:
                if ex.labels() == extra[0]:
                    witness = witness or ex.events
    elif missing and reasons:
        notes.append(f"{len(missing)} protocol trace(s) additionally cannot be enacted")

    ordered = _order_reasons(reasons)
    if ordered:
        if not witness and traces:
            # fall back to a trace witness (e.g. a nonlocal choice point is
            # a static finding with no single offending execution)
            witness = tuple(("E", o.occ, *o.label) for o in traces[0])
        return Verdict(Outcome.UNREALIZABLE, ordered, witness, tuple(notes))
    return Verdict(Outcome.REALIZABLE, (), (), tuple(notes))


def _fmt_labels(labels: tuple) -> str:
    return " . ".join(name for _, _, name in labels) or "<empty>"


def _order_reasons(reasons: list[Reason]) -> tuple[Reason, ...]:
    rank = {
        Reason.MERGE_FAILURE: 1,
        Reason.NONLOCAL_CHOICE: 0,
        Reason.DEADLOCK: 2,
        Reason.ORDER_VIOLATION: 3,
        Reason.TRACE_MISMATCH: 4,
    }
    out: list[Reason] = []
    for r in sorted(reasons, key=lambda r: rank[r]):
        if r not in out:
            out.append(r)
    return tuple(out)


def _project_all(working, cfg: CommConfig) -> dict[str, LocalExpr]:
    all_roles = expr_roles(_as_plain(working))
    behaviors: dict[str, LocalExpr] = {}
    for role in all_roles:
        if cfg.doctrine is Doctrine.TRACE_C:
            behaviors[role] = project_trace_c(working, role)
        elif cfg.doctrine is Doctrine.SCRIBBLE:
            behaviors[role] = project_scribble(_infer_deciders(working), role)
        else:
            behaviors[role] = project_trace_f(working, role)
    return behaviors


def _as_plain(e) -> CfpExpr:
    if isinstance(e, OccAtom):
        return e.atom
    if isinstance(e, (Seq, Shuffle)):
        return type(e)(_as_plain(e.left), _as_plain(e.right))
    if isinstance(e, Choice):
        return Choice(tuple(_as_plain(b) for b in e.branches), e.decider)
    return e


def _infer_deciders(e):
    """Session projection needs a decider on every choice; infer it as the
    unique sender of the branch-initial events, or fail the merge."""
    if isinstance(e, Choice):
        branches = tuple(_infer_deciders(b) for b in e.branches)
        decider = e.decider
        if decider is None:
            senders = {a.sender for b in e.branches for a in _occ_initials(b)}
            if len(senders) != 1:
                raise MergeFailure(
                    "no single role initiates every branch (candidates: " + ", ".join(sorted(senders)) + ")"
                )
            decider = senders.pop()
        return Choice(branches, decider)
    if isinstance(e, Seq):
        return Seq(_infer_deciders(e.left), _infer_deciders(e.right))
    if isinstance(e, Shuffle):
        return Shuffle(_infer_deciders(e.left), _infer_deciders(e.right))
    return e


def _repeated_schema_on_channel(traces):
    for t in traces:
        seen: set[tuple[str, str, str]] = set()
        for occ in t:
            label = occ.label
            if label in seen:
                return t, label
            seen.add(label)
    return None


def _check_constraints(expanded, cfg: CommConfig, outcome: CompositionOutcome) -> tuple[str | None, tuple]:
    if cfg.interpretation is None:
        return None, ()
    constraints = sequence_constraints(expanded, cfg.interpretation)
    if not constraints:
        return None, ()
    trace_occ_sets = [frozenset(o.occ for o in t) for t in occ_traces(expanded)]
    for ex in outcome.completed:
        occs = frozenset(ev[1] for ev in ex.events if ev[0] == "E")
        relevant = [c for c in constraints if c.left.occ in occs and c.right.occ in occs]
        for c in relevant:
            (k1, o1), (k2, o2) = c.events()
            p1 = ex.position(k1, o1)
            p2 = ex.position(k2, o2)
            if p1 is None or p2 is None:
                continue
            if p1 >= p2:
                return (
                    f"a completed execution violates the {cfg.interpretation.value} constraint {c}",
                    ex.events,
                )
    return None, ()
