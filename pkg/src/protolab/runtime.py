"""Execution of projected local behaviors over the simulated network.

Each agent holds the remainder of its local expression.  Emissions commit a
choice atomically (commit-by-sending); a mixed choice may also silently
commit to its reception-initiated branches, which is what makes genuinely
stuck states reachable when a choice is nonlocal.  Under anytime reception
an agent observes a message the moment it is delivered, and a delivery its
behavior cannot accept is an ordering violation; under the channel selector
arrivals wait in per-peer queues until the behavior expects that channel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cfp.projection import (
    RECV,
    SEND,
    ChoiceKind,
    LAtom,
    LChoice,
    LEps,
    LSeq,
    LShuffle,
    LocalExpr,
    L_EPSILON,
)
from .netsim import Delivery, Network, Reception, SimPolicy

# ---------------------------------------------------------------------------
# single-agent small-step semantics


def send_steps(e: LocalExpr) -> list[tuple[LAtom, LocalExpr]]:
    """Initially-performable emissions with the advanced remainder; entering
    a choice branch through its first send commits the choice."""
    if isinstance(e, LAtom):
        return [(e, L_EPSILON)] if e.direction == SEND else []
    if isinstance(e, LEps):
        return []
    if isinstance(e, LSeq):
        out = [(a, _lseq(rest, e.right)) for a, rest in send_steps(e.left)]
        if accepting(e.left):
            out.extend(send_steps(e.right))
        return out
    if isinstance(e, LChoice):
        if e.kind is ChoiceKind.EXTERNAL:
            return []
        out = []
        for b in e.branches:
            out.extend(send_steps(b))
        return out
    if isinstance(e, LShuffle):
        out = [(a, _lshuffle(rest, e.right)) for a, rest in send_steps(e.left)]
        out.extend((a, _lshuffle(e.left, rest)) for a, rest in send_steps(e.right))
        return out
    raise TypeError(f"runtime requires an expanded local behavior, got {type(e).__name__}")


def commit_steps(e: LocalExpr) -> list[LocalExpr]:
    """Silent commitments available at the frontier: a mixed choice may
    resolve to waiting on its reception-initiated branches."""
    if isinstance(e, (LAtom, LEps)):
        return []
    if isinstance(e, LSeq):
        out = [_lseq(left, e.right) for left in commit_steps(e.left)]
        if accepting(e.left):
            out.extend(_dedup(commit_steps(e.right)))
        return _dedup(out)
    if isinstance(e, LChoice):
        if e.kind is not ChoiceKind.MIXED:
            return []
        waitable = tuple(b for b in e.branches if not send_steps(b) or _recv_candidates(b))
        if not waitable or len(waitable) == len(e.branches):
            return []
        if len(waitable) == 1:
            return [waitable[0]]
        return [LChoice(waitable, ChoiceKind.EXTERNAL)]
    if isinstance(e, LShuffle):
        out = [_lshuffle(left, e.right) for left in commit_steps(e.left)]
        out.extend(_lshuffle(e.left, right) for right in commit_steps(e.right))
        return _dedup(out)
    raise TypeError(type(e))


def consume(e: LocalExpr, peer: str, name: str) -> list[LocalExpr]:
    """Ways to accept a reception of `name` from `peer` right now."""
    if isinstance(e, LAtom):
        if e.direction == RECV and e.peer == peer and e.name == name:
            return [L_EPSILON]
        return []
    if isinstance(e, LEps):
        return []
    if isinstance(e, LSeq):
        out = [_lseq(rest, e.right) for rest in consume(e.left, peer, name)]
        if accepting(e.left):
            out.extend(consume(e.right, peer, name))
        return _dedup(out)
    if isinstance(e, LChoice):
        out = []
        for b in e.branches:
            out.extend(consume(b, peer, name))
        return _dedup(out)
    if isinstance(e, LShuffle):
        out = [_lshuffle(rest, e.right) for rest in consume(e.left, peer, name)]
        out.extend(_lshuffle(e.left, rest) for rest in consume(e.right, peer, name))
        return _dedup(out)
    raise TypeError(type(e))


def _recv_candidates(e: LocalExpr) -> list[tuple[str, str]]:
    """(peer, name) pairs the behavior could accept as its next reception."""
    if isinstance(e, LAtom):
        return [(e.peer, e.name)] if e.direction == RECV else []
    if isinstance(e, LEps):
        return []
    if isinstance(e, LSeq):
        out = list(_recv_candidates(e.left))
        if accepting(e.left):
            out.extend(_recv_candidates(e.right))
        return out
    if isinstance(e, LChoice):
        return [c for b in e.branches for c in _recv_candidates(b)]
    if isinstance(e, LShuffle):
        return _recv_candidates(e.left) + _recv_candidates(e.right)
    raise TypeError(type(e))


def expected_peers(e: LocalExpr) -> tuple[str, ...]:
    return tuple(sorted({peer for peer, _ in _recv_candidates(e)}))


def accepting(e: LocalExpr) -> bool:
    if isinstance(e, LEps):
        return True
    if isinstance(e, LAtom):
        return False
    if isinstance(e, (LSeq, LShuffle)):
        return accepting(e.left) and accepting(e.right)
    if isinstance(e, LChoice):
        return any(accepting(b) for b in e.branches)
    raise TypeError(type(e))


def _lseq(l: LocalExpr, r: LocalExpr) -> LocalExpr:
    if isinstance(l, LEps):
        return r
    if isinstance(r, LEps):
        return l
    return LSeq(l, r)


def _lshuffle(l: LocalExpr, r: LocalExpr) -> LocalExpr:
    if isinstance(l, LEps):
        return r
    if isinstance(r, LEps):
        return l
    return LShuffle(l, r)


def _dedup(items: list) -> list:
    out = []
    for x in items:
        if x not in out:
            out.append(x)
    return out


# ---------------------------------------------------------------------------
# composition

Event = tuple[str, int, str, str, str]  # (kind E|R, occurrence, sender, receiver, msg)


@dataclass(frozen=True)
class Execution:
    events: tuple[Event, ...]

    def emissions(self) -> tuple[Event, ...]:
        return tuple(ev for ev in self.events if ev[0] == "E")

    def labels(self) -> tuple[tuple[str, str, str], ...]:
        return tuple((s, r, m) for kind, _, s, r, m in self.events if kind == "E")

    def position(self, kind: str, occ: int) -> int | None:
        for i, (k, o, *_rest) in enumerate(self.events):
            if k == kind and o == occ:
                return i
        return None


@dataclass(frozen=True)
class Violation:
    kind: str  # "reception-order" | "selector-type" | "constraint" | "correlation"
    detail: str
    events: tuple[Event, ...]


@dataclass(frozen=True)
class CompositionOutcome:
    completed: tuple[Execution, ...]
    deadlocks: tuple[tuple[Event, ...], ...]
    violations: tuple[Violation, ...]
    bound_exceeded: bool


def compose(
    behaviors: dict[str, LocalExpr],
    delivery: Delivery,
    reception: Reception,
    path_cap: int = 250_000,
) -> CompositionOutcome:
    """Explore every interleaving of the composed local behaviors over the
    network policy, collecting completed executions, stuck states, and
    reception violations."""
    roles = tuple(sorted(behaviors))
    policy = SimPolicy(delivery=delivery)
    start_locals = tuple(behaviors[r] for r in roles)
    start_pending: tuple = tuple(() for _ in roles)
    completed: list[Execution] = []
    completed_seen: set = set()
    deadlocks: list[tuple[Event, ...]] = []
    deadlock_seen: set = set()
    violations: list[Violation] = []
    violation_seen: set = set()
    exceeded = False
    stack = [((start_locals, Network(), start_pending), ())]
    visited_paths = 0
    seen_nodes: set = set()
    while stack:
        (locals_, net, pending), events = stack.pop()
        visited_paths += 1
        if visited_paths > path_cap:
            exceeded = True
            break
        node = (locals_, net, pending, events)
        if node in seen_nodes:
            continue
        seen_nodes.add(node)
        moves = _composite_moves(roles, locals_, net, pending, policy, reception, events)
        live_moves = []
        for move in moves:
            if isinstance(move, Violation):
                if (move.kind, move.detail) not in violation_seen:
                    violation_seen.add((move.kind, move.detail))
                    violations.append(move)
                continue
            live_moves.append(move)
        # a state can be both final and able to continue (a loop boundary),
        # so completion is recorded before expanding further moves
        if _completed(locals_, net, pending):
            if events not in completed_seen:
                completed_seen.add(events)
                completed.append(Execution(events))
        elif not moves:
            key = (locals_, net, pending)
            if key not in deadlock_seen:
                deadlock_seen.add(key)
                deadlocks.append(events)
        for state, event in live_moves:
            stack.append((state, events + ((event,) if event else ())))
    return CompositionOutcome(
        tuple(sorted(completed, key=lambda ex: ex.events)),
        tuple(sorted(deadlocks)),
        tuple(sorted(violations, key=lambda v: (v.kind, v.detail))),
        exceeded,
    )


def _completed(locals_, net: Network, pending) -> bool:
    pendings_empty = all(not queue for p in pending for _, queue in p)
    return net.empty() and pendings_empty and all(accepting(l) for l in locals_)


def _composite_moves(roles, locals_, net, pending, policy, reception, events):
    moves: list = []
    deliveries = net.deliverable(policy)
    force = policy.delivery is Delivery.SYNCHRONOUS and deliveries
    if not force:
        for i, role in enumerate(roles):
            for atom, rest in sorted(send_steps(locals_[i]), key=lambda p: (p[0].name, p[0].peer, p[0].occ or 0)):
                new_net = net.send(role, atom.peer, (atom.occ or 0, atom.name))
                event = ("E", atom.occ or 0, role, atom.peer, atom.name)
                moves.append(((locals_[:i] + (rest,) + locals_[i + 1 :], new_net, pending), event))
            for rest in commit_steps(locals_[i]):
                moves.append(((locals_[:i] + (rest,) + locals_[i + 1 :], net, pending), None))
    for env in deliveries:
        i = roles.index(env.receiver)
        occ, name = env.payload
        if reception is Reception.ANYTIME:
            alternatives = consume(locals_[i], env.sender, name)
            if not alternatives:
                moves.append(
                    Violation(
                        "reception-order",
                        f"{env.receiver} cannot accept {name} from {env.sender} at this point",
                        events + (("R", occ, env.sender, env.receiver, name),),
                    )
                )
                continue
            event = ("R", occ, env.sender, env.receiver, name)
            for rest in alternatives:
                moves.append(((locals_[:i] + (rest,) + locals_[i + 1 :], net.remove(env), pending), event))
        else:
            # deliver into the per-peer arrival queue; observation happens
            # only when the behavior reads that channel
            row = dict(pending[i])
            row[env.sender] = row.get(env.sender, ()) + ((occ, name),)
            new_pending = pending[:i] + (tuple(sorted(row.items())),) + pending[i + 1 :]
            moves.append(((locals_, net.remove(env), new_pending), None))
    if reception is Reception.BLOCKING_SELECTOR:
        for i, role in enumerate(roles):
            row = dict(pending[i])
            for peer in expected_peers(locals_[i]):
                queue = row.get(peer, ())
                if not queue:
                    continue
                occ, name = queue[0]
                alternatives = consume(locals_[i], peer, name)
                if not alternatives:
                    moves.append(
                        Violation(
                            "selector-type",
                            f"{role} expected a different message on the channel from {peer}, found {name}",
                            events + (("R", occ, peer, role, name),),
                        )
                    )
                    continue
                new_row = dict(row)
                new_row[peer] = queue[1:]
                if not new_row[peer]:
                    del new_row[peer]
                new_pending = pending[:i] + (tuple(sorted(new_row.items())),) + pending[i + 1 :]
                event = ("R", occ, peer, role, name)
                for rest in alternatives:
                    moves.append(((locals_[:i] + (rest,) + locals_[i + 1 :], net, new_pending), event))
    return moves
