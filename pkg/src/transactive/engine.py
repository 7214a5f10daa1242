"""Round-synchronous driver for the distributed transactive iteration.

One outer iteration ``k`` costs ``1 + 2d`` communication rounds on a tree
of diameter ``d``:

1. every agent sends its power to its topology neighbors;
2. a vector sweep gives every agent demand, generation, cost-weighted
   generation and the agent counts, hence the system price;
3. each agent takes a gradient step from its balance-corrected power and
   clamps to its box;
4. a second sweep sums the tentative signed powers;
5. generators absorb the remaining imbalance in equal shares.

Every agent also keeps a copy of the balance multiplier ``mu``. It is
advanced from the two sweep totals alone, so all agents hold the same
value and no private quantity leaves an agent.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from . import agents as ag
from .agents import AgentState
from .consensus import AggregateVector, gather_globals
from .errors import (DisconnectedError, NonPositivePriceError, ProtocolError, TransactiveError,
                     UnknownAgentError, ZeroGeneratorError)
from .events import BaseLoadSet, Join, Leave, ScenarioEvent
from .graph import Topology, neighbors
from .mdst import TreeOverlay, run_mdst_protocol
from .network import MultiplierValue, PowerValue, RoundNetwork
from .oracle import social_welfare

log = logging.getLogger(__name__)

# identical aggregates at different agents may differ by float rounding only
AGREEMENT_RTOL = 1e-9


@dataclass(frozen=True)
class StepsizeSchedule:
    """Diminishing stepsize ``alpha0 / (k + 1)`` capped at ``cap``."""

    alpha0: float
    cap: float = math.inf

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if not self.cap > 0:
            raise ValueError(f"cap must be positive, got {self.cap}")

    def __call__(self, k: int) -> float:
        return min(self.cap, self.alpha0 / (k + 1))

    @classmethod
    def rate_limited(cls, alpha0: float, agents: Iterable[AgentState], price: float) -> "StepsizeSchedule":
        """Cap the stepsize so a pure gradient move never exceeds a rate limit.

        ``price`` is the lowest price consumers are expected to see.
        """
        cap = math.inf
        for a in agents:
            p = a.params
            cap = min(cap, min(-p.t_min, p.t_max) / ag.gradient_bound(p, price))
        return cls(alpha0, cap)


@dataclass
class IterationRecord:
    k: int
    power: dict
    kind: dict
    base_load: dict
    price: float
    P_G: float
    P_D: float
    social_welfare: float
    box_violation: dict
    rate_violation: dict
    alpha: float = 0.0
    multiplier: float = 0.0
    rounds: int = 0
    tree_diameter: int = 0

    @property
    def imbalance(self) -> float:
        return self.P_G - self.P_D


class SimulationError(TransactiveError):
    """Runtime failure; ``records`` holds everything emitted before it."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


class Simulation:
    def __init__(self, agents: Sequence[AgentState], topology: Topology,
                 schedule: StepsizeSchedule, fixed_price: float | None = None,
                 keep_log: bool = False):
        self.states: dict[int, AgentState] = {a.id: a for a in sorted(agents, key=lambda a: a.id)}
        if set(self.states) != set(topology.nodes):
            raise UnknownAgentError(sorted(set(self.states) ^ set(topology.nodes)))
        for a in self.states.values():
            if not a.feasible:
                raise ValueError(f"agent {a.id}: initial power {a.power} outside "
                                 f"[{a.params.p_min}, {a.params.p_max}]")
        if fixed_price is not None and not fixed_price > 0:
            raise NonPositivePriceError(f"fixed price must be positive, got {fixed_price}")
        self.topology = topology
        self.schedule = schedule
        self.fixed_price = fixed_price
        self.network = RoundNetwork(keep_log=keep_log)
        self.multiplier = {a: 0.0 for a in self.states}
        self.tree: TreeOverlay | None = None
        self.tree_history: list[tuple[int, TreeOverlay]] = []
        self.records: list[IterationRecord] = []
        self.gradients: list[float] | None = [] if keep_log else None
        self.k = 0

    # -- phases -----------------------------------------------------------

    def run_mdst_phase(self) -> TreeOverlay:
        tree, rounds = run_mdst_protocol(self.topology, self.network)
        self.tree = tree
        self.tree_history.append((self.k, tree))
        log.info("k=%d overlay rooted at %d, diameter %d (%d rounds)",
                 self.k, tree.root, tree.tree_diameter, rounds)
        return tree

    def _exchange_powers(self):
        net = self.network
        net.open_phase("power", self.topology.adjacency)
        for a, s in self.states.items():
            net.broadcast(a, PowerValue(s.power))
        net.deliver()

    def run_iteration(self) -> IterationRecord:
        if self.tree is None:
            self.run_mdst_phase()
        k = self.k
        alpha = self.schedule(k)
        states = self.states
        rounds0 = self.network.round

        self._exchange_powers()
        agg = gather_globals(self.tree, states, self.network)
        prices = {a: self.fixed_price if self.fixed_price is not None else ag.system_price(agg[a])
                  for a in states}

        tentative = {}
        for a, s in states.items():
            g = ag.local_gradient(s, prices[a])
            if self.gradients is not None:
                self.gradients.append(g)
            avg = ag.signed_power(s) - alpha * self.multiplier[a]
            z = ag.from_signed(s, ag.gradient_step(avg, alpha, g))
            tentative[a] = ag.box_project(s, z)

        trial = {a: replace(s, power=tentative[a]) for a, s in states.items()}
        agg_t = gather_globals(self.tree, trial, self.network)

        new_power = {}
        new_mu = {}
        for a, s in states.items():
            if s.is_generator:
                new_power[a] = ag.balance_project(tentative[a], agg_t[a])
            else:
                new_power[a] = tentative[a]
            before = -agg[a].imbalance
            after = -agg_t[a].imbalance
            new_mu[a] = self.multiplier[a] + (after - before) / (alpha * agg[a].agents)

        root = self.tree.root
        record = IterationRecord(
            k=k,
            power={a: s.power for a, s in states.items()},
            kind={a: s.kind.value for a, s in states.items()},
            base_load={a: (0.0 if s.is_generator else s.params.base_load) for a, s in states.items()},
            price=prices[root],
            P_G=agg[root].P_G,
            P_D=agg[root].P_D,
            social_welfare=social_welfare(states.values(), {a: s.power for a, s in states.items()},
                                          prices[root]),
            box_violation={a: s.box_violation for a, s in states.items()},
            rate_violation={a: s.rate_violation for a, s in states.items()},
            alpha=alpha,
            multiplier=self.multiplier[root],
            rounds=self.network.round - rounds0,
            tree_diameter=self.tree.tree_diameter,
        )
        _check_agreement(agg)

        # commit only once every agent has its update
        self.states = {a: ag.apply_update(s, new_power[a]) for a, s in states.items()}
        self.multiplier = new_mu
        self.k += 1
        self.records.append(record)
        return record

    # -- membership -------------------------------------------------------

    def apply_event(self, event: ScenarioEvent) -> None:
        action = event.action
        if isinstance(action, BaseLoadSet):
            s = self.states.get(action.consumer)
            if s is None or s.is_generator:
                raise UnknownAgentError(action.consumer)
            self.states[action.consumer] = replace(
                s, params=replace(s.params, base_load=float(action.watts)))
            log.info("k=%d consumer %d base load -> %g W", self.k, action.consumer, action.watts)
            return
        if isinstance(action, Join):
            new = action.agent
            if not new.feasible:
                raise ValueError(f"joining agent {new.id}: power {new.power} outside its box")
            topology = self.topology.with_agent(new.id, action.links)
            self.topology = topology
            self.states[new.id] = new
            self.states = dict(sorted(self.states.items()))
            self._hand_over_multiplier(new.id)
            log.info("k=%d agent %d joined via %s", self.k, new.id, list(action.links))
        elif isinstance(action, Leave):
            for a in action.agents:
                if a not in self.states:
                    raise UnknownAgentError(a)
            remaining = [s for a, s in self.states.items() if a not in action.agents]
            if not any(s.is_generator for s in remaining):
                raise ZeroGeneratorError("leave would remove every generator")
            if all(s.is_generator for s in remaining):
                raise ValueError("leave would remove every consumer")
            self.topology = self.topology.without_agents(action.agents)
            for a in action.agents:
                del self.states[a]
                del self.multiplier[a]
            log.info("k=%d agents %s left", self.k, list(action.agents))
        else:
            raise TypeError(f"unknown event action {action!r}")
        self.run_mdst_phase()

    def _hand_over_multiplier(self, newcomer: int) -> None:
        sponsor = min(b for b in neighbors(self.topology, newcomer) if b in self.multiplier)
        net = self.network
        net.open_phase("handover", {sponsor: {newcomer}})
        net.send(sponsor, newcomer, MultiplierValue(self.multiplier[sponsor]))
        (msg,) = net.deliver()[newcomer]
        self.multiplier[newcomer] = msg.payload.value

    # -- full runs --------------------------------------------------------

    def run(self, max_iterations: int, events: Sequence[ScenarioEvent] = (),
            epsilon: float | None = None, patience: int = 50) -> list[IterationRecord]:
        pending = sorted(events, key=lambda e: e.at_iteration)
        if self.tree is None:
            self.run_mdst_phase()
        quiet = 0
        try:
            while self.k < max_iterations:
                while pending and pending[0].at_iteration == self.k:
                    self.apply_event(pending.pop(0))
                before = {a: s.power for a, s in self.states.items()}
                self.run_iteration()
                if epsilon is not None and not pending:
                    change = max(abs(self.states[a].power - p) for a, p in before.items())
                    quiet = quiet + 1 if change < epsilon else 0
                    if quiet >= patience:
                        log.info("converged at k=%d", self.k)
                        break
        except (TransactiveError, ValueError, ZeroDivisionError) as exc:
            raise SimulationError(f"iteration {self.k}: {exc}", list(self.records)) from exc
        return self.records


def _check_agreement(agg: Mapping[int, AggregateVector]) -> None:
    vals = list(agg.values())
    ref = vals[0]
    for v in vals[1:]:
        for x, y in zip(v.as_tuple(), ref.as_tuple()):
            if abs(x - y) > AGREEMENT_RTOL * max(abs(x), abs(y), 1.0):
                raise ProtocolError(f"agents disagree on aggregates: {v} vs {ref}")


def run_mdst_phase(topology: Topology, network: RoundNetwork | None = None) -> TreeOverlay:
    return run_mdst_protocol(topology, network)[0]


def run_scenario(scenario, keep_log: bool = False) -> list[IterationRecord]:
    return simulate(scenario, keep_log=keep_log).records


def simulate(scenario, keep_log: bool = False) -> Simulation:
    """Build and run a :class:`Simulation` from a loaded scenario."""
    sim = Simulation(scenario.initial_agents(), scenario.topology(), scenario.schedule(),
                     fixed_price=scenario.price, keep_log=keep_log)
    sim.run(scenario.max_iterations, scenario.events, scenario.epsilon)
    return sim
