"""Finite-time summation on a tree overlay.

On a tree of diameter ``d`` the two-term recursion

    x_a(1)   = x_a(0) + sum_b x_b(0)
    x_a(q+1) = sum_b x_b(q) + (1 - r_a) x_a(q-1),     q >= 1

(``b`` over tree neighbors, ``r_a`` the tree degree) leaves the exact
network-wide sum at every agent after exactly ``d`` steps. Running it any
longer destroys the result, so the horizon is part of the sweep state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .agents import AgentState, Kind
from .errors import OverlayMismatchError
from .mdst import TreeOverlay
from .network import RoundNetwork, SweepValue


@dataclass(frozen=True)
class AggregateVector:
    """Network totals: demand, generation, cost-weighted generation, counts."""

    P_D: float = 0.0
    P_G: float = 0.0
    C_G: float = 0.0
    N: float = 0
    M: float = 0

    def as_tuple(self) -> tuple:
        return (self.P_D, self.P_G, self.C_G, self.N, self.M)

    @classmethod
    def from_tuple(cls, values) -> "AggregateVector":
        return cls(*values)

    @property
    def imbalance(self) -> float:
        """Generation surplus ``P_G - P_D``."""
        return self.P_G - self.P_D

    @property
    def agents(self) -> float:
        return self.N + self.M


class SumSweepState:
    """One agent's side of a sweep."""

    __slots__ = ("x_prev", "x_curr", "q", "horizon", "degree")

    def __init__(self, value, horizon: int, degree: int):
        self.x_prev = None
        self.x_curr = value
        self.q = 0
        self.horizon = horizon
        self.degree = degree

    @property
    def complete(self) -> bool:
        return self.q == self.horizon

    def advance(self, received: list) -> None:
        if self.complete:
            raise OverlayMismatchError("sweep already ran for its full horizon")
        total = _vsum(received)
        if self.q == 0:
            nxt = _vadd(self.x_curr, total)
        else:
            nxt = _vadd(total, _vscale(1 - self.degree, self.x_prev))
        self.x_prev, self.x_curr = self.x_curr, nxt
        self.q += 1


# values are either plain numbers or tuples of numbers (vector sweeps)
def _vadd(x, y):
    if isinstance(x, tuple):
        return tuple(a + b for a, b in zip(x, y))
    return x + y


def _vscale(k, x):
    if isinstance(x, tuple):
        return tuple(k * a for a in x)
    return k * x


def _vsum(items):
    items = list(items)
    if not items:
        return None
    out = items[0]
    for it in items[1:]:
        out = _vadd(out, it)
    return out


def _check_agents(tree: TreeOverlay, keys) -> None:
    if set(keys) != set(tree.parent):
        missing = sorted(set(tree.parent) - set(keys))
        extra = sorted(set(keys) - set(tree.parent))
        raise OverlayMismatchError(f"overlay/agent mismatch: missing {missing}, unexpected {extra}")


def finite_time_sum(tree: TreeOverlay, initial: Mapping[int, object],
                    network: RoundNetwork | None = None) -> dict[int, object]:
    """Run the sweep for ``tree.tree_diameter`` rounds over the overlay only."""
    _check_agents(tree, initial)
    d = tree.tree_diameter
    if d == 0:
        return dict(initial)
    net = network or RoundNetwork()
    net.open_phase("sweep", tree.tree_neighbors)
    states = {a: SumSweepState(initial[a], d, tree.degree(a)) for a in tree.nodes}
    zero = _vscale(0, next(iter(initial.values())))
    for _ in range(d):
        for a, st in states.items():
            payload = SweepValue(st.x_curr if isinstance(st.x_curr, tuple) else (st.x_curr,))
            for b in tree.tree_neighbors[a]:
                net.send(a, b, payload)
        inbox = net.deliver()
        for a, st in states.items():
            got = [m.payload.values if isinstance(st.x_curr, tuple) else m.payload.values[0]
                   for m in inbox.get(a, ())]
            st.advance(got or [zero])
    return {a: st.x_curr for a, st in states.items()}


def init_aggregate(agent: AgentState) -> AggregateVector:
    if agent.kind is Kind.GENERATOR:
        return AggregateVector(0.0, agent.power, agent.power * agent.params.c, 1, 0)
    return AggregateVector(agent.params.base_load + agent.power, 0.0, 0.0, 0, 1)


def gather_globals(tree: TreeOverlay, agents: Mapping[int, AgentState],
                   network: RoundNetwork | None = None) -> dict[int, AggregateVector]:
    _check_agents(tree, agents)
    sums = finite_time_sum(tree, {a: init_aggregate(s).as_tuple() for a, s in agents.items()}, network)
    return {a: AggregateVector.from_tuple(v) for a, v in sums.items()}


def power_sum_sweep(tree: TreeOverlay, signed_powers: Mapping[int, float],
                    network: RoundNetwork | None = None) -> dict[int, float]:
    """Network sum of signed powers (demand positive, generation negative)."""
    return finite_time_sum(tree, signed_powers, network)
