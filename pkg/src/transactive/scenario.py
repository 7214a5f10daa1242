"""Scenario files, validation and CSV output.

A scenario is a YAML document::

    format_version: 1
    name: table1
    seed: 42
    max_iterations: 2250
    alpha0: 100000
    stepsize_cap: auto        # number, "auto" (rate-limited) or null
    epsilon: null             # stop early once powers settle
    price: null               # fixed consumer price; null = system price
    agents:
      - {id: 1, name: G1, kind: generator, c: 1.0, p_max: 4000, p_min: 100,
         t_min: -100, t_max: 100, power: 2000}
      - {id: 6, name: D1, kind: consumer, v: 1.0, p_max: 4100, p_min: 3000,
         t_min: -100, t_max: 100, base_load: 0, power: 3000}
    edges: [[1, 6]]
    events:
      - {at: 750, base_load_set: {consumer: 6, watts: 1000}}
      - {at: 750, join: {agent: {...}, links: [1]}}
      - {at: 1500, leave: [6]}

Validation reports every problem found, each prefixed with its line.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .agents import AgentState, ConsumerParams, GeneratorParams, Kind
from .engine import StepsizeSchedule
from .errors import ScenarioParseError, ScenarioValidationError
from .events import BaseLoadSet, Join, Leave, ScenarioEvent
from .graph import Topology, is_connected
from .oracle import supply_demand_ranges

FORMAT_VERSION = 1
CSV_HEADER = ("k", "agent_id", "kind", "power", "base_load", "price", "P_G", "P_D",
              "social_welfare", "imbalance", "box_violation", "rate_violation")

_TOP_KEYS = {"format_version", "name", "seed", "max_iterations", "alpha0", "stepsize_cap",
             "epsilon", "price", "agents", "edges", "events"}
_GEN_KEYS = {"id", "name", "kind", "c", "p_max", "p_min", "t_min", "t_max", "power"}
_CON_KEYS = {"id", "name", "kind", "v", "p_max", "p_min", "t_min", "t_max", "base_load", "power"}


class _LineDict(dict):
    lines: dict


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    out = _LineDict(loader.construct_mapping(node, deep=True))
    out.lines = {loader.construct_object(k): k.start_mark.line + 1 for k, _ in node.value}
    out.line = node.start_mark.line + 1
    return out


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _line(obj, key=None):
    if key is not None and isinstance(obj, _LineDict) and key in obj.lines:
        return obj.lines[key]
    return getattr(obj, "line", "?")


@dataclass
class ScenarioFile:
    agents: list
    edges: list
    events: list = field(default_factory=list)
    max_iterations: int = 1000
    alpha0: float = 1e5
    stepsize_cap: object = "auto"
    epsilon: float | None = None
    price: float | None = None
    seed: int = 0
    name: str = ""
    names: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def topology(self) -> Topology:
        return Topology.from_edges([a.id for a in self.agents], self.edges)

    def initial_agents(self) -> list[AgentState]:
        return list(self.agents)

    def all_agents(self) -> list[AgentState]:
        joined = [e.action.agent for e in self.events if isinstance(e.action, Join)]
        return list(self.agents) + joined

    def schedule(self) -> StepsizeSchedule:
        if self.stepsize_cap is None:
            return StepsizeSchedule(self.alpha0)
        if self.stepsize_cap == "auto":
            everyone = self.all_agents()
            if self.price is not None:
                floor = self.price
            else:
                # at balance the system price is a generation-weighted mean of costs
                floor = min(a.params.c for a in everyone if a.is_generator)
            return StepsizeSchedule.rate_limited(self.alpha0, everyone, floor)
        return StepsizeSchedule(self.alpha0, float(self.stepsize_cap))


# -- parsing ------------------------------------------------------------------

def _num(problems, obj, key, where, *, required=True, positive=False, nonneg=False,
         integer=False, default=None, allow_null=False):
    if key not in obj:
        if required:
            problems.append(f"line {_line(obj)}: {where}: missing '{key}'")
        return default
    val = obj[key]
    if val is None and allow_null:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        problems.append(f"line {_line(obj, key)}: {where}.{key}: expected a number, got {val!r}")
        return default
    if integer and not float(val).is_integer():
        problems.append(f"line {_line(obj, key)}: {where}.{key}: expected an integer, got {val!r}")
        return default
    if not math.isfinite(val) and not key.startswith("t_"):
        problems.append(f"line {_line(obj, key)}: {where}.{key}: must be finite")
        return default
    if positive and not val > 0:
        problems.append(f"line {_line(obj, key)}: {where}.{key}: must be positive, got {val}")
    if nonneg and not val >= 0:
        problems.append(f"line {_line(obj, key)}: {where}.{key}: must be non-negative, got {val}")
    return int(val) if integer else val


def _parse_agent(problems, raw, where, initial=True):
    if not isinstance(raw, dict):
        problems.append(f"line ?: {where}: expected a mapping")
        return None, None
    kind = raw.get("kind")
    if kind not in ("generator", "consumer"):
        problems.append(f"line {_line(raw, 'kind')}: {where}.kind: must be 'generator' or 'consumer', got {kind!r}")
        return None, None
    allowed = _GEN_KEYS if kind == "generator" else _CON_KEYS
    for key in sorted(set(raw) - allowed, key=str):
        problems.append(f"line {_line(raw, key)}: {where}: unknown field '{key}'")
    n0 = len(problems)
    aid = _num(problems, raw, "id", where, positive=True, integer=True)
    p_max = _num(problems, raw, "p_max", where, positive=True)
    p_min = _num(problems, raw, "p_min", where, nonneg=True, required=False, default=0.0)
    t_min = _num(problems, raw, "t_min", where, required=False, default=-math.inf)
    t_max = _num(problems, raw, "t_max", where, required=False, default=math.inf)
    power = _num(problems, raw, "power", where, nonneg=True)
    if kind == "generator":
        coef = _num(problems, raw, "c", where, positive=True)
    else:
        coef = _num(problems, raw, "v", where, positive=True)
        base = _num(problems, raw, "base_load", where, nonneg=True, required=False, default=0.0)
    if len(problems) > n0:
        return None, None
    if not p_max > p_min:
        problems.append(f"line {_line(raw, 'p_max')}: {where}.p_max: must exceed p_min ({p_min})")
    if not t_min < 0 < t_max:
        problems.append(f"line {_line(raw, 't_min')}: {where}.t_min/t_max: need t_min < 0 < t_max")
    if len(problems) > n0:
        return None, None
    if not p_min <= power <= p_max:
        problems.append(f"line {_line(raw, 'power')}: {where}.power: initial power {power} must be "
                        f"feasible, i.e. within [{p_min}, {p_max}]")
        return None, None
    if kind == "generator":
        params = GeneratorParams(c=float(coef), p_max=float(p_max), p_min=float(p_min),
                                 t_min=float(t_min), t_max=float(t_max))
    else:
        params = ConsumerParams(v=float(coef), p_max=float(p_max), p_min=float(p_min),
                                t_min=float(t_min), t_max=float(t_max), base_load=float(base))
    return AgentState(aid, Kind(kind), params, float(power)), raw.get("name")


def _ids(problems, raw, where):
    if isinstance(raw, int) and not isinstance(raw, bool):
        raw = [raw]
    if not isinstance(raw, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
        problems.append(f"line ?: {where}: expected a list of agent ids, got {raw!r}")
        return None
    return tuple(raw)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"{source}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError(f"{source}: top level must be a mapping")

    problems: list[str] = []
    for key in sorted(set(doc) - _TOP_KEYS, key=str):
        problems.append(f"line {_line(doc, key)}: unknown top-level field '{key}'")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        problems.append(f"line {_line(doc, 'format_version')}: format_version: "
                        f"expected {FORMAT_VERSION}, got {version!r}")
    max_it = _num(problems, doc, "max_iterations", "scenario", nonneg=True, integer=True, default=0)
    alpha0 = _num(problems, doc, "alpha0", "scenario", positive=True, default=1.0)
    epsilon = _num(problems, doc, "epsilon", "scenario", positive=True, required=False,
                   allow_null=True)
    price = _num(problems, doc, "price", "scenario", positive=True, required=False, allow_null=True)
    seed = _num(problems, doc, "seed", "scenario", integer=True, required=False, default=0)
    cap = doc.get("stepsize_cap", "auto")
    if cap is not None and cap != "auto":
        cap = _num(problems, doc, "stepsize_cap", "scenario", positive=True)

    agents, names = [], {}
    raw_agents = doc.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        problems.append(f"line {_line(doc, 'agents')}: agents: need a non-empty list")
        raw_agents = []
    for i, raw in enumerate(raw_agents):
        state, name = _parse_agent(problems, raw, f"agents[{i}]")
        if state is None:
            continue
        if state.id in names or any(a.id == state.id for a in agents):
            problems.append(f"line {_line(raw, 'id')}: agents[{i}].id: duplicate id {state.id}")
            continue
        agents.append(state)
        if name is not None:
            names[state.id] = str(name)

    ids = {a.id for a in agents}
    edges = []
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        problems.append(f"line {_line(doc, 'edges')}: edges: expected a list of [a, b] pairs")
        raw_edges = []
    for i, e in enumerate(raw_edges):
        if (not isinstance(e, list) or len(e) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)):
            problems.append(f"line {_line(doc, 'edges')}: edges[{i}]: expected [a, b], got {e!r}")
            continue
        a, b = e
        if a == b:
            problems.append(f"line {_line(doc, 'edges')}: edges[{i}]: self-loop on {a}")
            continue
        missing = [x for x in (a, b) if x not in ids]
        if missing and len(ids) == len(raw_agents):
            problems.append(f"line {_line(doc, 'edges')}: edges[{i}]: unknown agent(s) {missing}")
            continue
        if not missing:
            edges.append((min(a, b), max(a, b)))
    edges = sorted(set(edges))

    topo = None
    if agents and len(ids) == len(raw_agents):
        topo = Topology.from_edges(ids, edges, require_connected=False)
        if not is_connected(topo):
            problems.append(f"line {_line(doc, 'edges')}: edges: communication graph is not connected")
            topo = None
        gens = [a for a in agents if a.is_generator]
        cons = [a for a in agents if not a.is_generator]
        if not gens:
            problems.append(f"line {_line(doc, 'agents')}: agents: need at least one generator")
        if not cons:
            problems.append(f"line {_line(doc, 'agents')}: agents: need at least one consumer")
        if gens and cons:
            demand, supply = supply_demand_ranges(agents)
            if demand[1] < supply[0] or supply[1] < demand[0]:
                problems.append(f"line {_line(doc, 'agents')}: agents: feasible set is empty, demand "
                                f"range {demand} does not meet supply range {supply}")

    events = _parse_events(problems, doc, agents, topo, names)

    if problems:
        raise ScenarioValidationError([f"{source}: {p}" for p in problems])
    return ScenarioFile(agents=agents, edges=edges, events=events, max_iterations=max_it,
                        alpha0=float(alpha0), stepsize_cap=cap, epsilon=epsilon, price=price,
                        seed=seed, name=str(doc.get("name", "")), names=names,
                        format_version=version)


def _parse_events(problems, doc, agents, topo, names):
    raw_events = doc.get("events", []) or []
    if not isinstance(raw_events, list):
        problems.append(f"line {_line(doc, 'events')}: events: expected a list")
        return []
    live = {a.id: a for a in agents}
    events = []
    order = sorted(range(len(raw_events)),
                   key=lambda i: raw_events[i].get("at", 0) if isinstance(raw_events[i], dict) else 0)
    for i in order:
        raw = raw_events[i]
        where = f"events[{i}]"
        if not isinstance(raw, dict):
            problems.append(f"line ?: {where}: expected a mapping")
            continue
        at = _num(problems, raw, "at", where, integer=True)
        if at is None:
            continue
        if at < 1:
            problems.append(f"line {_line(raw, 'at')}: {where}.at: must be >= 1, got {at}")
            continue
        actions = [k for k in ("base_load_set", "join", "leave") if k in raw]
        extra = set(raw) - {"at", "base_load_set", "join", "leave"}
        if len(actions) != 1 or extra:
            problems.append(f"line {_line(raw)}: {where}: need exactly one of base_load_set, join, leave")
            continue
        kind = actions[0]
        body = raw[kind]
        if kind == "base_load_set":
            if not isinstance(body, dict):
                problems.append(f"line {_line(raw, kind)}: {where}.base_load_set: expected a mapping")
                continue
            cid = _num(problems, body, "consumer", f"{where}.base_load_set", integer=True)
            watts = _num(problems, body, "watts", f"{where}.base_load_set", nonneg=True)
            if cid is None or watts is None:
                continue
            if cid not in live or live[cid].is_generator:
                problems.append(f"line {_line(body, 'consumer')}: {where}: no consumer {cid} "
                                f"at iteration {at}")
                continue
            events.append(ScenarioEvent(at, BaseLoadSet(cid, float(watts))))
        elif kind == "join":
            if not isinstance(body, dict) or "agent" not in body:
                problems.append(f"line {_line(raw, kind)}: {where}.join: expected agent and links")
                continue
            state, name = _parse_agent(problems, body["agent"], f"{where}.join.agent")
            links = _ids(problems, body.get("links", []), f"{where}.join.links")
            if state is None or links is None:
                continue
            if state.id in live:
                problems.append(f"line {_line(body['agent'], 'id')}: {where}: agent {state.id} "
                                f"already present")
                continue
            unknown = [b for b in links if b not in live]
            if unknown:
                problems.append(f"line {_line(body, 'links')}: {where}.join.links: unknown agents {unknown}")
                continue
            if not links:
                problems.append(f"line {_line(body)}: {where}.join.links: a joining agent needs a link")
                continue
            if topo is not None:
                topo = topo.with_agent(state.id, links)
            live[state.id] = state
            events.append(ScenarioEvent(at, Join(state, tuple(links))))
            if name is not None:
                names[state.id] = str(name)
        else:
            gone = _ids(problems, body, f"{where}.leave")
            if gone is None:
                continue
            unknown = [a for a in gone if a not in live]
            if unknown:
                problems.append(f"line {_line(raw, 'leave')}: {where}.leave: no agents {unknown} "
                                f"at iteration {at}")
                continue
            rest = [a for a in live.values() if a.id not in gone]
            if not any(a.is_generator for a in rest) or all(a.is_generator for a in rest):
                problems.append(f"line {_line(raw, 'leave')}: {where}.leave: must keep at least one "
                                f"generator and one consumer")
                continue
            if topo is not None:
                cut = Topology({a: frozenset(n - set(gone)) for a, n in topo.adjacency.items()
                                if a not in gone}, require_connected=False)
                if not is_connected(cut):
                    problems.append(f"line {_line(raw, 'leave')}: {where}.leave: removing {list(gone)} "
                                    f"disconnects the communication graph")
                    continue
                topo = cut
            for a in gone:
                del live[a]
            events.append(ScenarioEvent(at, Leave(tuple(gone))))
    return events


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    return parse_scenario(text, str(path))


def bundled_scenarios() -> list[str]:
    root = resources.files(__package__) / "scenarios"
    return sorted(p.name.removesuffix(".scenario") for p in root.iterdir()
                  if p.name.endswith(".scenario"))


def bundled_path(name: str) -> Path:
    """Filesystem path of a scenario shipped with the package."""
    path = Path(str(resources.files(__package__) / "scenarios" / f"{name}.scenario"))
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario {name!r}; have {bundled_scenarios()}")
    return path


def resolve_scenario(ref: str) -> ScenarioFile:
    """Load ``ref`` as a path, falling back to a bundled scenario name."""
    if Path(ref).exists():
        return load_scenario(ref)
    if ref in bundled_scenarios():
        return load_scenario(bundled_path(ref))
    return load_scenario(ref)


# -- writing ------------------------------------------------------------------

def _agent_dict(state: AgentState, name=None) -> dict:
    p = state.params
    out = {"id": state.id}
    if name is not None:
        out["name"] = name
    out["kind"] = state.kind.value
    if state.is_generator:
        out["c"] = p.c
    else:
        out["v"] = p.v
    out.update(p_max=p.p_max, p_min=p.p_min, t_min=p.t_min, t_max=p.t_max)
    if not state.is_generator:
        out["base_load"] = p.base_load
    out["power"] = state.power
    return out


def _event_dict(ev: ScenarioEvent, names) -> dict:
    act = ev.action
    if isinstance(act, BaseLoadSet):
        return {"at": ev.at_iteration, "base_load_set": {"consumer": act.consumer, "watts": act.watts}}
    if isinstance(act, Join):
        return {"at": ev.at_iteration, "join": {"agent": _agent_dict(act.agent, names.get(act.agent.id)),
                                                "links": list(act.links)}}
    return {"at": ev.at_iteration, "leave": list(act.agents)}


def dump_scenario(sc: ScenarioFile) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "name": sc.name,
        "seed": sc.seed,
        "max_iterations": sc.max_iterations,
        "alpha0": sc.alpha0,
        "stepsize_cap": sc.stepsize_cap,
        "epsilon": sc.epsilon,
        "price": sc.price,
        "agents": [_agent_dict(a, sc.names.get(a.id)) for a in sc.agents],
        "edges": [list(e) for e in sc.edges],
        "events": [_event_dict(e, sc.names) for e in sc.events],
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


def write_scenario(sc: ScenarioFile, path) -> None:
    Path(path).write_text(dump_scenario(sc))


def record_rows(records):
    for r in records:
        for a in sorted(r.power):
            yield (r.k, a, r.kind[a], r.power[a], r.base_load[a], r.price, r.P_G, r.P_D,
                   r.social_welfare, r.imbalance, r.box_violation[a], r.rate_violation[a])


def write_records(records, path) -> None:
    """CSV with one row per agent per iteration; floats keep full precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in record_rows(records):
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def random_connected_edges(ids, extra: int, seed: int) -> list[tuple[int, int]]:
    """Random spanning tree over ``ids`` plus ``extra`` distinct chords."""
    rng = np.random.default_rng(seed)
    ids = [int(x) for x in ids]
    order = [ids[i] for i in rng.permutation(len(ids))]
    edges = set()
    for i in range(1, len(order)):
        b = order[int(rng.integers(i))]
        edges.add((min(order[i], b), max(order[i], b)))
    free = [(a, b) for i, a in enumerate(sorted(ids)) for b in sorted(ids)[i + 1:] if (a, b) not in edges]
    extra = min(extra, len(free))
    for j in rng.choice(len(free), size=extra, replace=False):
        edges.add(free[int(j)])
    return sorted(edges)
