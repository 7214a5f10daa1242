"""Timed exogenous changes applied between iterations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .agents import AgentState


@dataclass(frozen=True)
class BaseLoadSet:
    consumer: int
    watts: float


@dataclass(frozen=True)
class Join:
    agent: AgentState
    links: tuple = ()


@dataclass(frozen=True)
class Leave:
    agents: tuple = ()


Action = Union[BaseLoadSet, Join, Leave]


@dataclass(frozen=True)
class ScenarioEvent:
    at_iteration: int
    action: Action = field(default=None)

    def __post_init__(self):
        if self.at_iteration < 1:
            raise ValueError(f"events must be scheduled at iteration >= 1, got {self.at_iteration}")
