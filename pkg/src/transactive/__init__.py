"""Distributed transactive energy dispatch over a tree overlay."""
from .agents import AgentState, ConsumerParams, GeneratorParams, Kind
from .consensus import AggregateVector, finite_time_sum
from .engine import IterationRecord, Simulation, SimulationError, StepsizeSchedule, simulate
from .events import BaseLoadSet, Join, Leave, ScenarioEvent
from .graph import Topology
from .mdst import TreeOverlay, distributed_apsp, elect_center, run_mdst_protocol
from .oracle import DispatchSolution, solve_market, solve_welfare
from .scenario import ScenarioFile, bundled_path, load_scenario, write_records

__all__ = [
    "AgentState", "AggregateVector", "BaseLoadSet", "ConsumerParams", "DispatchSolution",
    "GeneratorParams", "IterationRecord", "Join", "Kind", "Leave", "ScenarioEvent",
    "ScenarioFile", "Simulation", "SimulationError", "StepsizeSchedule", "Topology",
    "TreeOverlay", "bundled_path", "distributed_apsp", "elect_center", "finite_time_sum",
    "load_scenario", "run_mdst_protocol", "simulate", "solve_market", "solve_welfare",
    "write_records",
]
