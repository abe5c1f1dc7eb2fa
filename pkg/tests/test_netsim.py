import pytest

from protolab.bspl.enactment import EMISSION, RECEPTION, instance_views, is_complete
from protolab.netsim import (
    BsplAgent,
    Delivery,
    InstanceScript,
    Network,
    SimPolicy,
    explore,
    run_one,
)


def agent_pair(protocol, rows):
    scripts = [InstanceScript.make(protocol, rows)]
    return [BsplAgent(role, scripts) for role in protocol.roles]


def obs_shape(history):
    return tuple((o.kind, o.instance.schema.name) for o in history.observations)


WW_ROWS = [{"ID": "1", "item": "fig", "price": "$5"}]


def test_unordered_reaches_both_reception_orders(want_willpay):
    result = explore(agent_pair(want_willpay, WW_ROWS), SimPolicy(Delivery.UNORDERED))
    seller_orders = set()
    for vec in result.enactments:
        for h in vec:
            if h.owner == "Seller":
                seller_orders.add(obs_shape(h))
    assert ((RECEPTION, "Want"), (RECEPTION, "WillPay")) in seller_orders
    assert ((RECEPTION, "WillPay"), (RECEPTION, "Want")) in seller_orders


def test_fifo_excludes_reordered_reception(want_willpay):
    result = explore(agent_pair(want_willpay, WW_ROWS), SimPolicy(Delivery.FIFO_PAIRWISE))
    for vec in result.enactments:
        for h in vec:
            if h.owner == "Seller":
                assert obs_shape(h) == ((RECEPTION, "Want"), (RECEPTION, "WillPay"))


def test_zero_agents_single_empty_enactment():
    result = explore([], SimPolicy(Delivery.UNORDERED))
    assert result.enactments == ((),)


def test_synchronous_policy_adjacent_delivery(want_willpay):
    vector, log = run_one(agent_pair(want_willpay, WW_ROWS), SimPolicy(Delivery.SYNCHRONOUS), seed=4)
    for i, (agent, kind, mi) in enumerate(log):
        if kind == EMISSION:
            follow = log[i + 1]
            assert follow[1] == RECEPTION and follow[2] == mi


def test_indirect_payment_out_of_order_reachable(indirect_payment):
    rows = [{"ID": "1", "item": "fig", "price": "$5", "decision": "deal", "instruction": "wire", "OK": "paid"}]
    result = explore(agent_pair(indirect_payment, rows), SimPolicy(Delivery.UNORDERED))
    seller_orders = set()
    for vec in result.enactments:
        for h in vec:
            if h.owner == "Seller":
                seller_orders.add(obs_shape(h))
    # the transfer can overtake the acceptance at the seller even though
    # every channel individually respects FIFO (it carries one message)
    assert ((EMISSION, "Offer"), (RECEPTION, "Transfer"), (RECEPTION, "Accept")) in seller_orders
    assert ((EMISSION, "Offer"), (RECEPTION, "Accept"), (RECEPTION, "Transfer")) in seller_orders


def test_every_maximal_enactment_is_complete(want_willpay):
    result = explore(agent_pair(want_willpay, WW_ROWS), SimPolicy(Delivery.UNORDERED))
    assert result.enactments
    for vec in result.enactments:
        views = instance_views(list(vec), want_willpay)
        assert views and all(is_complete(v, want_willpay) for v in views)


def test_run_one_replay_determinism(want_willpay, indirect_payment):
    rows_ip = [{"ID": "1", "item": "fig", "price": "$5", "decision": "deal", "instruction": "wire", "OK": "paid"}]
    for seed in range(100):
        for protocol, rows in ((want_willpay, WW_ROWS), (indirect_payment, rows_ip)):
            first = run_one(agent_pair(protocol, rows), SimPolicy(Delivery.UNORDERED), seed=seed)
            second = run_one(agent_pair(protocol, rows), SimPolicy(Delivery.UNORDERED), seed=seed)
            assert first == second


def test_run_one_choice_script(purchase):
    rows = [
        {
            "ID": "1",
            "item": "fig",
            "price": "$5",
            "decision": "deal",
            "OK": "fine",
            "address": "24 Hill St",
            "dropOff": "porch",
        }
    ]
    agents = agent_pair(purchase, rows)
    vector, log = run_one(agents, SimPolicy(Delivery.UNORDERED), choice_script=[0] * 40)
    assert log, "the scripted walk makes progress"
    with pytest.raises(RuntimeError):
        run_one(agents, SimPolicy(Delivery.UNORDERED), choice_script=[0])


def test_loss_disabled_everything_delivered(want_willpay):
    result = explore(agent_pair(want_willpay, WW_ROWS), SimPolicy(Delivery.UNORDERED, loss_enabled=False))
    for vec in result.enactments:
        sent = [o.instance for h in vec for o in h.observations if o.kind == EMISSION]
        received = [o.instance for h in vec for o in h.observations if o.kind == RECEPTION]
        assert sorted(str(m) for m in sent) == sorted(str(m) for m in received)


def test_loss_enabled_reaches_partial_enactments(want_willpay):
    result = explore(agent_pair(want_willpay, WW_ROWS), SimPolicy(Delivery.UNORDERED, loss_enabled=True))
    shapes = set()
    for vec in result.enactments:
        for h in vec:
            if h.owner == "Seller":
                shapes.add(obs_shape(h))
    assert () in shapes  # everything lost is a reachable outcome


def test_network_fifo_heads_only():
    net = Network().send("A", "B", "m1").send("A", "B", "m2").send("A", "C", "m3")
    fifo = net.deliverable(SimPolicy(Delivery.FIFO_PAIRWISE))
    assert [e.payload for e in fifo] == ["m1", "m3"]
    unordered = net.deliverable(SimPolicy(Delivery.UNORDERED))
    assert [e.payload for e in unordered] == ["m1", "m2", "m3"]


def test_network_noncreative_removal():
    net = Network().send("A", "B", "m1")
    env = net.deliverable(SimPolicy(Delivery.UNORDERED))[0]
    assert net.remove(env).empty()


def test_compliant_simulation_never_conflicts(purchase, pricing):
    # exhaustive runs as the oracle: knowledge unions never conflict when
    # every emission passed the correctness check
    from protolab.bspl.enactment import known_bindings

    cases = [
        (purchase, [{
            "ID": "1", "item": "fig", "price": "$5", "decision": "deal",
            "OK": "fine", "address": "x", "dropOff": "porch",
        }]),
        (pricing, [{"ID": "1", "item": "fig", "price": "$5"}, {"ID": "2", "item": "jam", "price": "$6"}]),
    ]
    for protocol, rows in cases:
        result = explore(agent_pair(protocol, rows), SimPolicy(Delivery.UNORDERED))
        assert result.enactments
        for vec in result.enactments:
            views = instance_views(list(vec), protocol)  # raises on conflict
            for h in vec:
                for view in views:
                    known_bindings(h, view.key, protocol)  # raises on conflict
