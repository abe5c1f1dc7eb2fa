"""Shared enactment log format, one event per line:

    <tick> <agent> <E|R> <MsgName> <key=val,...>

Rejected emission attempts are recorded as `X` lines carrying the reason
instead of bindings.  Logs serve replay and golden tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bspl.core import InfoProtocol
from .bspl.enactment import EMISSION, RECEPTION, History, MessageInstance, Observation, apply_observation


@dataclass(frozen=True)
class LogEntry:
    tick: int
    agent: str
    kind: str  # E | R | X
    message: str
    bindings: tuple[tuple[str, str], ...] = ()
    reason: str = ""


def format_log(entries: list[LogEntry]) -> str:
    lines = []
    for e in entries:
        if e.kind == "X":
            lines.append(f"{e.tick} {e.agent} X {e.message} {e.reason}")
        else:
            body = ",".join(f"{k}={v}" for k, v in e.bindings)
            lines.append(f"{e.tick} {e.agent} {e.kind} {e.message} {body}")
    return "\n".join(lines) + "\n"


def parse_log(text: str, protocols: list[InfoProtocol]) -> list[LogEntry]:
    schemas = {}
    for p in protocols:
        for m in p.messages:
            if m.name in schemas and schemas[m.name] is not m:
                raise ValueError(f"message name {m.name} is ambiguous across the loaded protocols")
            schemas[m.name] = m
    entries = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        parts = line.split(None, 4)
        if len(parts) < 4:
            raise ValueError(f"malformed log line: {line!r}")
        tick, agent, kind, message = int(parts[0]), parts[1], parts[2], parts[3]
        if kind == "X":
            entries.append(LogEntry(tick, agent, kind, message, (), parts[4] if len(parts) > 4 else ""))
            continue
        if kind not in (EMISSION, RECEPTION):
            raise ValueError(f"unknown event kind {kind!r} in line {line!r}")
        if message not in schemas:
            raise ValueError(f"unknown message {message!r}")
        bindings: list[tuple[str, str]] = []
        if len(parts) > 4:
            for item in parts[4].split(","):
                if not item:
                    continue
                k, _, v = item.partition("=")
                bindings.append((k, v))
        entries.append(LogEntry(tick, agent, kind, message, tuple(bindings)))
    return entries


def histories_from_log(entries: list[LogEntry], protocols: list[InfoProtocol]) -> dict[str, History]:
    """Rebuild per-agent histories.  The numeric column is the logical
    timestamp (several observations may share a day); an agent's
    observation order is its line order within equal timestamps."""
    schemas = {m.name: m for p in protocols for m in p.messages}
    histories: dict[str, History] = {}
    ordered = sorted(enumerate(entries), key=lambda pair: (pair[1].agent, pair[1].tick, pair[0]))
    for _, e in ordered:
        if e.kind == "X":
            continue
        h = histories.setdefault(e.agent, History(e.agent))
        mi = MessageInstance.make(schemas[e.message], dict(e.bindings))
        histories[e.agent] = apply_observation(h, Observation(e.kind, mi, h.last_tick() + 1, day=e.tick))
    return histories


def log_from_histories(histories: dict[str, History]) -> list[LogEntry]:
    entries = []
    for agent in sorted(histories):
        for obs in histories[agent].observations:
            entries.append(LogEntry(obs.logical_day, agent, obs.kind, obs.instance.schema.name, obs.instance.bindings))
    return entries


def log_from_run(log: list[tuple[str, str, MessageInstance]]) -> list[LogEntry]:
    """Entries from a simulator run's global event list, with per-agent ticks."""
    ticks: dict[str, int] = {}
    entries = []
    for agent, kind, mi in log:
        ticks[agent] = ticks.get(agent, 0) + 1
        entries.append(LogEntry(ticks[agent], agent, kind, mi.schema.name, mi.bindings))
    return entries
