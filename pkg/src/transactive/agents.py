"""Local agent models: cost and utility, gradients, and projections.

Powers are stored unsigned (watts delivered or consumed). The optimizer
works in a signed coordinate where demand counts positive and generation
negative, so the balance constraint reads ``sum(signed) == 0``; use
:func:`signed_power` and :func:`from_signed` to move between the two.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Union

from .errors import NonPositivePriceError, ZeroDemandError, ZeroGeneratorError

BALANCE_RTOL = 1e-9


class Kind(str, enum.Enum):
    GENERATOR = "generator"
    CONSUMER = "consumer"


def _check_box(p_min, p_max, t_min, t_max):
    if not p_max > p_min >= 0:
        raise ValueError(f"need p_max > p_min >= 0, got p_min={p_min}, p_max={p_max}")
    if not t_min < 0 < t_max:
        raise ValueError(f"need t_min < 0 < t_max, got t_min={t_min}, t_max={t_max}")


@dataclass(frozen=True)
class GeneratorParams:
    c: float
    p_max: float
    p_min: float = 0.0
    t_min: float = -math.inf
    t_max: float = math.inf

    def __post_init__(self):
        _check_box(self.p_min, self.p_max, self.t_min, self.t_max)
        if not self.c > 0:
            raise ValueError(f"power cost must be positive, got {self.c}")


@dataclass(frozen=True)
class ConsumerParams:
    v: float
    p_max: float
    p_min: float = 0.0
    t_min: float = -math.inf
    t_max: float = math.inf
    base_load: float = 0.0

    def __post_init__(self):
        _check_box(self.p_min, self.p_max, self.t_min, self.t_max)
        if not self.v > 0:
            raise ValueError(f"power value must be positive, got {self.v}")
        if self.base_load < 0:
            raise ValueError(f"base load must be non-negative, got {self.base_load}")


Params = Union[GeneratorParams, ConsumerParams]


@dataclass(frozen=True)
class AgentState:
    id: int
    kind: Kind
    params: Params
    power: float
    power_prev: float | None = None

    def __post_init__(self):
        expected = GeneratorParams if self.kind is Kind.GENERATOR else ConsumerParams
        if not isinstance(self.params, expected):
            raise TypeError(f"{self.kind.value} {self.id} needs {expected.__name__}")

    @classmethod
    def generator(cls, id, power, **params) -> "AgentState":
        return cls(id, Kind.GENERATOR, GeneratorParams(**params), float(power))

    @classmethod
    def consumer(cls, id, power, **params) -> "AgentState":
        return cls(id, Kind.CONSUMER, ConsumerParams(**params), float(power))

    @property
    def is_generator(self) -> bool:
        return self.kind is Kind.GENERATOR

    @property
    def feasible(self) -> bool:
        return self.params.p_min <= self.power <= self.params.p_max

    @property
    def box_violation(self) -> float:
        """Watts outside ``[p_min, p_max]`` (0 when inside)."""
        p = self.params
        return max(0.0, self.power - p.p_max, p.p_min - self.power)

    @property
    def rate_violation(self) -> float:
        """Watts by which the last change broke the rate limits."""
        if self.power_prev is None:
            return 0.0
        delta = self.power - self.power_prev
        return max(0.0, delta - self.params.t_max, self.params.t_min - delta)


def generation_cost(params: GeneratorParams, p: float) -> float:
    return (p - p * p / params.p_max) / params.c


def consumer_utility(params: ConsumerParams, p: float, price: float) -> float:
    if not price > 0:
        raise NonPositivePriceError(f"price must be positive, got {price}")
    return params.v / price * (p - p * p / params.p_max)


def system_price(agg) -> float:
    """Cost-weighted generation per watt demanded, ``C_G / P_D``.

    A zero numerator gives price 0, which callers treat as degenerate.
    """
    if not agg.P_D > 0:
        raise ZeroDemandError(f"system price undefined for total demand {agg.P_D}")
    return agg.C_G / agg.P_D


def signed_power(state: AgentState) -> float:
    if state.is_generator:
        return -state.power
    return state.params.base_load + state.power


def from_signed(state: AgentState, s: float) -> float:
    if state.is_generator:
        return -s
    return s - state.params.base_load


def local_gradient(state: AgentState, price: float) -> float:
    """Derivative of the agent's term of the minimized objective.

    Taken with respect to the signed power coordinate, so generators and
    consumers both pull toward the midpoint of their parabola.
    """
    p = state.params
    slope = 1.0 - 2.0 * state.power / p.p_max
    if state.is_generator:
        return slope / p.c
    if not price > 0:
        raise NonPositivePriceError(f"price must be positive, got {price}")
    return -p.v / price * slope


def gradient_bound(params: Params, price: float = 1.0) -> float:
    """Largest ``|local_gradient|`` anywhere in the power box."""
    worst = max(abs(1 - 2 * params.p_min / params.p_max), 1.0)
    if isinstance(params, GeneratorParams):
        return worst / params.c
    return worst * params.v / price


def gradient_step(consensus_avg: float, alpha: float, grad: float) -> float:
    if not alpha > 0:
        raise ValueError(f"stepsize must be positive, got {alpha}")
    return consensus_avg - alpha * grad


def box_project(state: AgentState, z: float) -> float:
    p = state.params
    if z > p.p_max:
        return p.p_max
    if z < p.p_min:
        return p.p_min
    return z


def is_balanced(P_G: float, P_D: float) -> bool:
    return abs(P_G - P_D) <= BALANCE_RTOL * max(P_G, P_D, 1.0)


def balance_project(z1: float, agg) -> float:
    """Shift a generator by its equal share of the generation surplus."""
    if agg.N < 1:
        raise ZeroGeneratorError("balance projection needs at least one generator")
    if is_balanced(agg.P_G, agg.P_D):
        return z1
    return z1 - (agg.P_G - agg.P_D) / agg.N


def apply_update(state: AgentState, new_power: float) -> AgentState:
    """Commit a new power; read ``rate_violation`` on the result for the flag."""
    if not math.isfinite(new_power):
        raise ValueError(f"agent {state.id}: non-finite power {new_power}")
    return replace(state, power=float(new_power), power_prev=state.power)
