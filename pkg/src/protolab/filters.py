"""Per-agent protocol filter: checks requested emissions against the local
history, records observations, and optionally applies the channel-selector
reception discipline.

The filter never rejects a reception.  Under anytime reception a delivery
is recorded immediately; under the blocking selector it waits in a per-peer
queue until the behavior expects that channel.  Integrity trouble observed
on reception is recorded and flagged as peer noncompliance, never refused.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bspl.core import InfoProtocol
from .bspl.enactment import (
    EMISSION,
    RECEPTION,
    History,
    IntegrityConflict,
    MessageInstance,
    check_emission,
    known_bindings,
    observe,
)
from .cfp.fsm import TypeLevelFsm
from .diagnostics import Diagnostic, Severity
from .hapn import HapnConfigState, HapnEvent, HapnMachine, NoTransition, step_hapn
from .netsim import Reception


@dataclass(frozen=True)
class BsplBackend:
    """Universe of discourse: every schema of every loaded protocol."""

    protocols: tuple[InfoProtocol, ...]

    def protocol_of(self, mi: MessageInstance) -> InfoProtocol | None:
        for p in self.protocols:
            if mi.schema in p.messages:
                return p
        return None


@dataclass(frozen=True)
class CfpBackend:
    """Type-level machine; only messages in the machine's alphabet fit."""

    fsm: TypeLevelFsm


@dataclass(frozen=True)
class HapnBackend:
    machine: HapnMachine


@dataclass(frozen=True)
class FilterState:
    owner: str
    backend: BsplBackend | CfpBackend | HapnBackend
    reception: Reception = Reception.ANYTIME
    history: History | None = None
    fsm_state: int | None = None
    hapn_config: HapnConfigState | None = None
    pending: tuple[tuple[str, tuple[MessageInstance, ...]], ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()
    rejections: tuple[tuple[str, str], ...] = ()  # (message name, reason)

    def __post_init__(self):
        if self.history is None:
            object.__setattr__(self, "history", History(self.owner))
        if isinstance(self.backend, CfpBackend) and self.fsm_state is None:
            object.__setattr__(self, "fsm_state", self.backend.fsm.initial)
        if isinstance(self.backend, HapnBackend) and self.hapn_config is None:
            object.__setattr__(self, "hapn_config", HapnConfigState(self.backend.machine.initial))


@dataclass(frozen=True)
class Rejection:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def request_emission(f: FilterState, mi: MessageInstance) -> tuple[FilterState, Rejection | None]:
    """Accept and record the emission iff the backend allows it from the
    current state; on rejection the history is unchanged and the attempt is
    logged as a rejection record."""
    if mi.schema.sender != f.owner:
        return _reject(f, mi, Rejection("NotSender", f"{f.owner} is not the sender of {mi.schema.name}"))
    if isinstance(f.backend, BsplBackend):
        protocol = f.backend.protocol_of(mi)
        if protocol is None:
            return _reject(f, mi, Rejection("UnknownMessage", f"{mi.schema.name} is not in any loaded protocol"))
        error = check_emission(f.history, mi, protocol)
        if error is not None:
            return _reject(f, mi, Rejection(error.code, str(error)))
        return _record(f, EMISSION, mi), None
    if isinstance(f.backend, CfpBackend):
        label = _fsm_label(f.backend.fsm, mi.schema.receiver, "!", mi.schema.name)
        nxt = f.backend.fsm.step(f.fsm_state, label) if label else None
        if nxt is None:
            return _reject(f, mi, Rejection("NotInProtocol", f"the local machine has no send of {mi.schema.name} here"))
        return _record(_with(f, fsm_state=nxt), EMISSION, mi), None
    machine = f.backend.machine
    event = _hapn_event(mi)
    try:
        successors = step_hapn(f.hapn_config, machine, event)
    except NoTransition:
        return _reject(f, mi, Rejection("NotInProtocol", f"no machine transition for {mi.schema.name}"))
    return _record(_with(f, hapn_config=successors[0]), EMISSION, mi), None


def _reject(f: FilterState, mi: MessageInstance, rejection: Rejection) -> tuple[FilterState, Rejection]:
    logged = _with(f, rejections=f.rejections + ((mi.schema.name, str(rejection)),))
    return logged, rejection


def filter_log(f: FilterState) -> list:
    """The filter's event trace in the shared log format, rejections included."""
    from .enactlog import LogEntry

    entries = [
        LogEntry(obs.logical_day, f.owner, obs.kind, obs.instance.schema.name, obs.instance.bindings)
        for obs in f.history.observations
    ]
    last = f.history.last_tick()
    for i, (name, reason) in enumerate(f.rejections):
        entries.append(LogEntry(last + i + 1, f.owner, "X", name, (), reason))
    return entries


def on_delivery(f: FilterState, mi: MessageInstance) -> tuple[FilterState, list[MessageInstance]]:
    """Handle an infrastructure delivery; returns the new state and the
    observations surfaced to the reasoner (possibly several when a held
    message becomes visible, possibly none while a message is held)."""
    if mi.schema.receiver != f.owner:
        raise ValueError(f"{f.owner} is not the receiver of {mi.schema.name}")
    if f.reception is Reception.ANYTIME or isinstance(f.backend, (BsplBackend, HapnBackend)):
        return _receive_now(f, mi), [mi]
    # blocking selector: queue per sending peer, then drain whatever the
    # machine currently expects
    row = dict(f.pending)
    row[mi.schema.sender] = row.get(mi.schema.sender, ()) + (mi,)
    state = _with(f, pending=tuple(sorted(row.items())))
    return _drain(state)


def _drain(f: FilterState) -> tuple[FilterState, list[MessageInstance]]:
    surfaced: list[MessageInstance] = []
    progress = True
    while progress:
        progress = False
        row = dict(f.pending)
        for peer in sorted(row):
            queue = row[peer]
            if not queue:
                continue
            head = queue[0]
            label = _fsm_label(f.backend.fsm, peer, "?", head.schema.name)
            nxt = f.backend.fsm.step(f.fsm_state, label) if label else None
            if _expects_channel(f.backend.fsm, f.fsm_state, peer):
                if nxt is None:
                    f = _with(
                        f,
                        diagnostics=f.diagnostics
                        + (
                            Diagnostic(
                                "UnexpectedMessage",
                                f"{head.schema.name} arrived on the expected channel from {peer} but does not fit",
                                subject=f.owner,
                            ),
                        ),
                    )
                    row[peer] = queue[1:]
                    f = _with(f, pending=_prune(row))
                    progress = True
                    break
                row[peer] = queue[1:]
                f = _with(f, pending=_prune(row), fsm_state=nxt)
                f = _record(f, RECEPTION, head)
                surfaced.append(head)
                progress = True
                break
    return f, surfaced


def _prune(row: dict) -> tuple:
    return tuple(sorted((peer, queue) for peer, queue in row.items() if queue))


def _expects_channel(fsm: TypeLevelFsm, state: int, peer: str) -> bool:
    return any(src == state and lab[0] == peer and lab[1] == "?" for src, lab, _ in fsm.transitions)


def _receive_now(f: FilterState, mi: MessageInstance) -> FilterState:
    f = _record(f, RECEPTION, mi)
    if isinstance(f.backend, BsplBackend):
        protocol = f.backend.protocol_of(mi)
        if protocol is not None:
            try:
                known_bindings(f.history, mi.key(protocol), protocol)
            except IntegrityConflict as conflict:
                f = _with(
                    f,
                    diagnostics=f.diagnostics
                    + (Diagnostic("IntegrityConflict", str(conflict), Severity.WARNING, subject=f.owner),),
                )
        else:
            f = _with(
                f,
                diagnostics=f.diagnostics
                + (Diagnostic("UnknownMessage", f"{mi.schema.name} is not in any loaded protocol", Severity.WARNING),),
            )
    elif isinstance(f.backend, CfpBackend):
        label = _fsm_label(f.backend.fsm, mi.schema.sender, "?", mi.schema.name)
        nxt = f.backend.fsm.step(f.fsm_state, label) if label else None
        if nxt is None:
            f = _with(
                f,
                diagnostics=f.diagnostics
                + (Diagnostic("NotInProtocol", f"reception of {mi.schema.name} deviates from the local machine", Severity.WARNING),),
            )
        else:
            f = _with(f, fsm_state=nxt)
    elif isinstance(f.backend, HapnBackend):
        try:
            successors = step_hapn(f.hapn_config, f.backend.machine, _hapn_event(mi))
            f = _with(f, hapn_config=successors[0])
        except NoTransition:
            f = _with(
                f,
                diagnostics=f.diagnostics
                + (Diagnostic("NotInProtocol", f"no machine transition for {mi.schema.name}", Severity.WARNING),),
            )
    return f


def _record(f: FilterState, kind: str, mi: MessageInstance) -> FilterState:
    return _with(f, history=observe(f.history, kind, mi))


def _with(f: FilterState, **kw) -> FilterState:
    data = {
        "owner": f.owner,
        "backend": f.backend,
        "reception": f.reception,
        "history": f.history,
        "fsm_state": f.fsm_state,
        "hapn_config": f.hapn_config,
        "pending": f.pending,
        "diagnostics": f.diagnostics,
        "rejections": f.rejections,
    }
    data.update(kw)
    return FilterState(**data)


def _fsm_label(fsm: TypeLevelFsm, peer: str, direction: str, name: str):
    """Resolve the full label by peer, direction, and message name; the type
    signature tags along (labels are value-blind, names resolve uniquely)."""
    for _, label, _ in fsm.transitions:
        if label[0] == peer and label[1] == direction and label[2] == name:
            return label
    return None


def _hapn_event(mi: MessageInstance) -> HapnEvent:
    return HapnEvent(mi.schema.sender, mi.schema.receiver, mi.schema.name, mi.bindings)
