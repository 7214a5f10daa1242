"""Centralized reference dispatch, used by tests and ``verify``.

The distributed iteration climbs the separable concave objective

    sum_j U_j(P_dj) + sum_i C_i(P_gi)

under the balance constraint and the power boxes. Each term is a downward
parabola, so for a balance multiplier ``lam`` (value of one more watt of
demand) every agent's best response is its clamped stationary point:

    consumer   U'(p) = lam   ->  p = p_max/2 * (1 - lam * price / v)
    generator  C'(p) = -lam  ->  p = p_max/2 * (1 + lam * c)

Demand falls and generation rises with ``lam``, so the balance residual is
monotone and bisection finds the multiplier.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .agents import AgentState, consumer_utility, generation_cost
from .errors import InfeasibleError

MAX_BISECTIONS = 200
BALANCE_RTOL = 1e-9


@dataclass(frozen=True)
class DispatchSolution:
    powers: dict
    multiplier: float
    objective: float
    welfare: float
    price: float
    demand: float
    generation: float

    @property
    def residual(self) -> float:
        return self.demand - self.generation


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def best_response(agent: AgentState, lam: float, price: float) -> float:
    p = agent.params
    if agent.is_generator:
        return _clamp(0.5 * p.p_max * (1 + lam * p.c), p.p_min, p.p_max)
    return _clamp(0.5 * p.p_max * (1 - lam * price / p.v), p.p_min, p.p_max)


def _residual(agents, lam, price):
    demand = supply = 0.0
    for a in agents:
        x = best_response(a, lam, price)
        if a.is_generator:
            supply += x
        else:
            demand += a.params.base_load + x
    return demand - supply, demand


def _bracket(agents, price):
    lows, highs = [], []
    for a in agents:
        p = a.params
        inner = 1 - 2 * p.p_min / p.p_max
        if a.is_generator:
            lows.append(-inner / p.c)
            highs.append(1 / p.c)
        else:
            lows.append(-p.v / price)
            highs.append(inner * p.v / price)
    return min(lows), max(highs)


def supply_demand_ranges(agents: Sequence[AgentState]):
    gens = [a for a in agents if a.is_generator]
    cons = [a for a in agents if not a.is_generator]
    demand = (sum(c.params.base_load + c.params.p_min for c in cons),
              sum(c.params.base_load + c.params.p_max for c in cons))
    supply = (sum(g.params.p_min for g in gens), sum(g.params.p_max for g in gens))
    return demand, supply


def solve_welfare(agents: Sequence[AgentState], price: float) -> DispatchSolution:
    """Optimal dispatch at a fixed system price."""
    agents = list(agents)
    demand, supply = supply_demand_ranges(agents)
    if demand[1] < supply[0] or supply[1] < demand[0]:
        raise InfeasibleError(
            f"no balanced dispatch: demand range {demand} and supply range {supply} do not overlap",
            demand, supply)
    lo, hi = _bracket(agents, price)
    lam = 0.5 * (lo + hi)
    for _ in range(MAX_BISECTIONS):
        lam = 0.5 * (lo + hi)
        r, total = _residual(agents, lam, price)
        if abs(r) <= BALANCE_RTOL * max(total, 1.0) * 1e-3 or hi - lo <= 1e-15 * max(1.0, abs(lam)):
            break
        if r > 0:
            lo = lam
        else:
            hi = lam
    powers = {a.id: best_response(a, lam, price) for a in agents}
    gen = sum(powers[a.id] for a in agents if a.is_generator)
    dem = sum(a.params.base_load + powers[a.id] for a in agents if not a.is_generator)
    return DispatchSolution(powers, lam, dispatch_objective(agents, powers, price),
                            social_welfare(agents, powers, price), price, dem, gen)


def social_welfare(agents: Sequence[AgentState], powers: Mapping[int, float], price: float) -> float:
    """Consumer utility minus generation cost."""
    total = 0.0
    for a in agents:
        p = powers[a.id]
        if a.is_generator:
            total -= generation_cost(a.params, p)
        else:
            total += consumer_utility(a.params, p, price)
    return total


def dispatch_objective(agents: Sequence[AgentState], powers: Mapping[int, float], price: float) -> float:
    """The concave objective the dispatch maximizes (see module docstring)."""
    total = 0.0
    for a in agents:
        p = powers[a.id]
        if a.is_generator:
            total += generation_cost(a.params, p)
        else:
            total += consumer_utility(a.params, p, price)
    return total


def solve_market(agents: Sequence[AgentState], tol: float = 1e-12,
                 max_rounds: int = 1000) -> DispatchSolution:
    """Dispatch whose consumer price equals its own cost-weighted generation per demand.

    Alternates between solving at a price and recomputing the price from
    the result until the price stops moving.
    """
    agents = list(agents)
    gens = [a for a in agents if a.is_generator]
    price = sum(g.params.c for g in gens) / len(gens)
    for _ in range(max_rounds):
        sol = solve_welfare(agents, price)
        implied = sum(g.params.c * sol.powers[g.id] for g in gens) / sol.demand
        if abs(implied - price) <= tol * price:
            return solve_welfare(agents, implied)
        price = implied
    raise ArithmeticError(f"price did not settle after {max_rounds} rounds (last {price})")
