import pytest

from protolab.bspl.enactment import instance_views
from protolab.enactlog import (
    LogEntry,
    format_log,
    histories_from_log,
    log_from_histories,
    log_from_run,
    parse_log,
)
from protolab.netsim import BsplAgent, Delivery, InstanceScript, SimPolicy, run_one


def test_log_roundtrip(pricing):
    entries = [
        LogEntry(1, "Buyer", "E", "Request", (("ID", "1"), ("item", "fig"))),
        LogEntry(1, "Seller", "R", "Request", (("ID", "1"), ("item", "fig"))),
        LogEntry(2, "Seller", "E", "Offer", (("ID", "1"), ("price", "$5"))),
        LogEntry(2, "Buyer", "R", "Offer", (("ID", "1"), ("price", "$5"))),
    ]
    text = format_log(entries)
    assert parse_log(text, [pricing]) == entries


def test_rejection_lines_roundtrip(pricing):
    entries = [LogEntry(3, "Seller", "X", "Offer", (), "AlreadyBound(price)")]
    text = format_log(entries)
    parsed = parse_log(text, [pricing])
    assert parsed[0].kind == "X" and parsed[0].reason == "AlreadyBound(price)"


def test_unknown_message_rejected(pricing):
    with pytest.raises(ValueError):
        parse_log("1 Buyer E Bogus ID=1", [pricing])


def test_replay_reproduces_views(want_willpay):
    scripts = [InstanceScript.make(want_willpay, [{"ID": "1", "item": "fig", "price": "$5"}])]
    agents = [BsplAgent(r, scripts) for r in want_willpay.roles]
    for seed in range(20):
        vector, log = run_one(agents, SimPolicy(Delivery.UNORDERED), seed=seed)
        histories = {h.owner: h for h in vector}
        entries = log_from_histories(histories)
        replayed = histories_from_log(parse_log(format_log(entries), [want_willpay]), [want_willpay])
        original_views = instance_views(list(histories.values()), want_willpay)
        replayed_views = instance_views(list(replayed.values()), want_willpay)
        assert original_views == replayed_views
        for owner, h in histories.items():
            assert [o.instance for o in replayed[owner].observations] == [o.instance for o in h.observations]


def test_log_from_run_ticks_are_per_agent(want_willpay):
    scripts = [InstanceScript.make(want_willpay, [{"ID": "1", "item": "fig", "price": "$5"}])]
    agents = [BsplAgent(r, scripts) for r in want_willpay.roles]
    _, log = run_one(agents, SimPolicy(Delivery.UNORDERED), seed=1)
    entries = log_from_run(log)
    per_agent: dict[str, list[int]] = {}
    for e in entries:
        per_agent.setdefault(e.agent, []).append(e.tick)
    for ticks in per_agent.values():
        assert ticks == sorted(ticks) and len(set(ticks)) == len(ticks)
