import pytest

from transactive.errors import ProtocolError
from transactive.network import (DistanceAnnounce, Message, PowerValue, RoundNetwork,
                                 SweepValue)


def test_delivery_batches_by_round():
    net = RoundNetwork(keep_log=True)
    net.open_phase("t", {1: {2}, 2: {1}})
    net.send(1, 2, PowerValue(5.0))
    net.broadcast(2, PowerValue(7.0))
    inbox = net.deliver()
    assert inbox[2] == [Message(1, 0, PowerValue(5.0))]
    assert inbox[1] == [Message(2, 0, PowerValue(7.0))]
    assert net.round == 1
    assert net.counts["PowerValue"] == 2
    assert net.payload_types() == {PowerValue}


def test_send_off_link_rejected():
    net = RoundNetwork()
    net.open_phase("t", {1: {2}, 2: {1}, 3: set()})
    with pytest.raises(ProtocolError):
        net.send(1, 3, PowerValue(1.0))


def test_unknown_payload_rejected():
    net = RoundNetwork()
    net.open_phase("t", {1: {2}, 2: {1}})
    with pytest.raises(ProtocolError):
        net.send(1, 2, ("c", 1.0))


def test_send_without_phase():
    with pytest.raises(ProtocolError):
        RoundNetwork().send(1, 2, PowerValue(1.0))


def test_phase_change_requires_empty_mailboxes():
    net = RoundNetwork()
    net.open_phase("a", {1: {2}, 2: {1}})
    net.send(1, 2, SweepValue((1,)))
    with pytest.raises(ProtocolError):
        net.open_phase("b", {1: {2}, 2: {1}})


def test_stale_round_detected():
    net = RoundNetwork()
    net.open_phase("a", {1: {2}, 2: {1}})
    net.send(1, 2, DistanceAnnounce(1, 0))
    net._outbox[2][0] = net._outbox[2][0]._replace(round=-1)
    with pytest.raises(ProtocolError):
        net.deliver()
