"""Round-synchronous message passing between agents.

Every message sent during round ``q`` is tagged with ``q`` and delivered in
one batch when the round closes; nothing is lost, delayed or reordered.
Each phase declares which links may carry traffic, so a sweep on the tree
overlay can never leak onto a topology-only edge.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from typing import Iterable, Mapping, NamedTuple, Union

from .errors import ProtocolError


class DistanceAnnounce(NamedTuple):
    dest: int
    distance: int


class EccentricityAnnounce(NamedTuple):
    agent: int
    value: int


class ParentSelect(NamedTuple):
    """Child-to-parent notice that closes the tree construction."""
    center: int


class SweepValue(NamedTuple):
    values: tuple


class PowerValue(NamedTuple):
    watts: float


class MultiplierValue(NamedTuple):
    """Balance multiplier handed to an agent joining a running network."""
    value: float


Payload = Union[DistanceAnnounce, EccentricityAnnounce, ParentSelect, SweepValue, PowerValue,
                MultiplierValue]
PAYLOAD_TYPES = (DistanceAnnounce, EccentricityAnnounce, ParentSelect, SweepValue, PowerValue,
                 MultiplierValue)


class Message(NamedTuple):
    sender: int
    round: int
    payload: Payload


class RoundNetwork:
    """Mailboxes with a barrier between rounds.

    ``keep_log=True`` retains every delivered message for auditing; the
    per-payload-type counters are always kept.
    """

    def __init__(self, keep_log: bool = False):
        self.round = 0
        self.keep_log = keep_log
        self.log: list[tuple[int, Message]] = []
        self.counts: Counter = Counter()
        self._links: Mapping[int, Iterable[int]] | None = None
        self._phase = None
        self._outbox: dict[int, list[Message]] = defaultdict(list)

    def open_phase(self, name: str, links: Mapping[int, Iterable[int]]) -> None:
        if self._outbox:
            raise ProtocolError(f"phase {name!r} opened with undelivered messages")
        self._phase = name
        self._links = {a: frozenset(n) for a, n in links.items()}

    def send(self, sender: int, recipient: int, payload: Payload) -> None:
        if self._links is None:
            raise ProtocolError("no phase is open")
        if recipient not in self._links.get(sender, ()):
            raise ProtocolError(
                f"{sender} -> {recipient} is not a link of phase {self._phase!r}")
        if not isinstance(payload, PAYLOAD_TYPES):
            raise ProtocolError(f"unsupported payload {type(payload).__name__}")
        self._outbox[recipient].append(Message(sender, self.round, payload))

    def broadcast(self, sender: int, payload: Payload) -> None:
        for b in self._links.get(sender, ()):
            self.send(sender, b, payload)

    def deliver(self) -> dict[int, list[Message]]:
        """Close the current round and hand every agent its inbox."""
        inbox, self._outbox = self._outbox, defaultdict(list)
        for recipient, msgs in inbox.items():
            for m in msgs:
                if m.round != self.round:
                    raise ProtocolError(f"stale message from round {m.round} in round {self.round}")
                self.counts[type(m.payload).__name__] += 1
                if self.keep_log:
                    self.log.append((recipient, m))
        self.round += 1
        return inbox

    def payload_types(self) -> set[type]:
        if self.keep_log:
            return {type(m.payload) for _, m in self.log}
        names = {t.__name__: t for t in PAYLOAD_TYPES}
        return {names[n] for n in self.counts}
