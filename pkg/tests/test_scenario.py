import hashlib
import textwrap
from pathlib import Path

import pytest

from transactive.engine import IterationRecord, run_scenario
from transactive.errors import ScenarioParseError, ScenarioValidationError
from transactive.graph import is_connected
from transactive.scenario import (CSV_HEADER, bundled_path, bundled_scenarios, dump_scenario,
                                  load_scenario, parse_scenario, random_connected_edges,
                                  write_records)

GOLDEN = Path(__file__).parent / "golden"

TABLE_GEN = [(4000, 100), (6000, 100), (7000, 100), (8000, 100), (9000, 100)]
TABLE_CON = [(4100, 3000), (5200, 4000), (6300, 5000), (6400, 5000), (7500, 6000), (2000, 0)]

BASE = """\
format_version: 1
max_iterations: 10
alpha0: 1000
agents:
  - {id: 1, kind: generator, c: 1.0, p_max: 4000, p_min: 100, power: 2000}
  - {id: 2, kind: generator, c: 2.0, p_max: 4000, p_min: 100, power: 1000}
  - {id: 3, kind: consumer, v: 1.0, p_max: 4000, p_min: 500, power: 3000}
  - {id: 4, kind: consumer, v: 1.0, p_max: 4000, p_min: 0, power: 0}
edges: [[1, 3], [2, 3], [3, 4]]
"""


def parse(text):
    return parse_scenario(textwrap.dedent(text))


def problems(text):
    with pytest.raises(ScenarioValidationError) as info:
        parse(text)
    return info.value.problems


def test_bundled_list():
    assert bundled_scenarios() == ["membership", "table1", "two_by_two"]


def test_table1_parameters():
    sc = load_scenario(bundled_path("table1"))
    gens = [a for a in sc.agents if a.is_generator]
    cons = [a for a in sc.agents if not a.is_generator]
    assert [(g.params.p_max, g.params.p_min) for g in gens] == TABLE_GEN
    assert [(c.params.p_max, c.params.p_min) for c in cons] == TABLE_CON[:5]
    assert all(a.params.t_min == -100 and a.params.t_max == 100 for a in sc.agents)
    assert sc.seed == 42
    joined = load_scenario(bundled_path("membership")).all_agents()
    rows = [(a.params.p_max, a.params.p_min) for a in joined if not a.is_generator]
    assert rows == TABLE_CON


def test_base_scenario_parses():
    sc = parse(BASE)
    assert len(sc.agents) == 4 and sc.edges == [(1, 3), (2, 3), (3, 4)]
    assert sc.price is None and sc.stepsize_cap == "auto"


def test_infeasible_initial_power_names_line():
    text = BASE.replace("p_min: 100, power: 2000", "p_min: 100, power: 50")
    (msg,) = problems(text)
    assert "line 5" in msg and "agents[0].power" in msg and "feasible" in msg


def test_every_problem_is_reported():
    text = (BASE.replace("format_version: 1", "format_version: 2")
                .replace("c: 2.0", "c: -2.0")
                .replace("v: 1.0, p_max: 4000, p_min: 0", "v: 1.0, p_max: 4000, p_min: 4000"))
    msgs = problems(text)
    assert len(msgs) == 3
    assert any("format_version" in m for m in msgs)
    assert any("agents[1].c" in m and "positive" in m for m in msgs)
    assert any("agents[3].p_max" in m for m in msgs)


@pytest.mark.parametrize("edit, fragment", [
    (("edges: [[1, 3], [2, 3], [3, 4]]", "edges: [[1, 3], [2, 3]]"), "not connected"),
    (("edges: [[1, 3]", "edges: [[1, 9]"), "unknown agent"),
    (("edges: [[1, 3]", "edges: [[1, 2, 3], [1, 3]"), "expected [a, b]"),
    (("edges: [[1, 3]", "edges: [[1, 1], [1, 3]"), "self-loop"),
    (("{id: 2,", "{id: 1,"), "duplicate id"),
    (("alpha0: 1000", "alpha0: 0"), "alpha0"),
    (("max_iterations: 10", "max_iterations: -1"), "max_iterations"),
    (("max_iterations: 10", "max_iterations: 10\nbogus: 1"), "unknown top-level field"),
    (("kind: generator, c: 1.0", "kind: turbine, c: 1.0"), "kind"),
    (("c: 1.0, p_max", "c: 1.0, colour: red, p_max"), "unknown field 'colour'"),
    (("p_min: 500, power: 3000", "p_min: 500, t_min: 5, power: 3000"), "t_min"),
    (("v: 1.0, p_max: 4000, p_min: 500", "v: 0, p_max: 4000, p_min: 500"), "agents[2].v"),
    (("p_min: 500, power: 3000", "p_min: 500, base_load: -1, power: 3000"), "base_load"),
])
def test_rejecting_fixtures(edit, fragment):
    old, new = edit
    assert old in BASE
    msgs = problems(BASE.replace(old, new, 1))
    assert any(fragment in m for m in msgs), msgs


def test_missing_kind_of_agent():
    text = BASE.replace("  - {id: 1, kind: generator, c: 1.0, p_max: 4000, p_min: 100, power: 2000}\n"
                        "  - {id: 2, kind: generator, c: 2.0, p_max: 4000, p_min: 100, power: 1000}\n",
                        "").replace("edges: [[1, 3], [2, 3], [3, 4]]", "edges: [[3, 4]]")
    assert any("at least one generator" in m for m in problems(text))


def test_empty_feasible_set():
    text = BASE.replace("p_min: 0, power: 0", "p_min: 0, base_load: 9000, power: 0")
    assert any("feasible set is empty" in m for m in problems(text))


EVENT_CASES = [
    ("- {at: 0, leave: [4]}", "must be >= 1"),
    ("- {at: 3, leave: [3]}", "disconnects"),
    ("- {at: 3, leave: [9]}", "no agents [9]"),
    ("- {at: 3, leave: [1, 2]}", "at least one"),
    ("- {at: 3, base_load_set: {consumer: 1, watts: 5}}", "no consumer 1"),
    ("- {at: 3, base_load_set: {consumer: 3, watts: -5}}", "non-negative"),
    ("- {at: 3, leave: [4], join: {}}", "exactly one"),
    ("- {at: 3, join: {agent: {id: 3, kind: consumer, v: 1, p_max: 10, power: 0}, links: [1]}}",
     "already present"),
    ("- {at: 3, join: {agent: {id: 5, kind: consumer, v: 1, p_max: 10, power: 20}, links: [1]}}",
     "feasible"),
    ("- {at: 3, join: {agent: {id: 5, kind: consumer, v: 1, p_max: 10, power: 0}, links: [7]}}",
     "unknown agents [7]"),
    ("- {at: 3, join: {agent: {id: 5, kind: consumer, v: 1, p_max: 10, power: 0}, links: []}}",
     "needs a link"),
    ("- {at: 3, leave: [4]}\n  - {at: 5, base_load_set: {consumer: 4, watts: 5}}", "no consumer 4"),
]


@pytest.mark.parametrize("event, fragment", EVENT_CASES)
def test_rejecting_events(event, fragment):
    msgs = problems(BASE + "events:\n  " + event + "\n")
    assert any(fragment in m for m in msgs), msgs


def test_valid_events():
    sc = parse(BASE + "events:\n"
               "  - {at: 2, join: {agent: {id: 5, kind: consumer, v: 1, p_max: 10, power: 0}, links: [4]}}\n"
               "  - {at: 4, leave: [5, 4]}\n"
               "  - {at: 1, base_load_set: {consumer: 4, watts: 10}}\n")
    assert [e.at_iteration for e in sc.events] == [1, 2, 4]


def test_parse_errors():
    with pytest.raises(ScenarioParseError):
        parse_scenario("agents: [unclosed")
    with pytest.raises(ScenarioParseError):
        parse_scenario("- just a list")
    with pytest.raises(ScenarioParseError):
        load_scenario("/nonexistent/x.scenario")


@pytest.mark.parametrize("name", ["table1", "membership", "two_by_two"])
def test_round_trip(name, tmp_path):
    sc = load_scenario(bundled_path(name))
    again = parse_scenario(dump_scenario(sc))
    assert again == sc


def _record(k, n):
    ids = range(1, n + 1)
    return IterationRecord(k=k, power={a: 1.0 * a for a in ids},
                           kind={a: "generator" if a <= n // 2 else "consumer" for a in ids},
                           base_load={a: 0.0 for a in ids}, price=1.0, P_G=3.0, P_D=7.0,
                           social_welfare=0.1, box_violation={a: 0.0 for a in ids},
                           rate_violation={a: 0.0 for a in ids})


def test_csv_row_count(tmp_path):
    out = tmp_path / "r.csv"
    write_records([_record(k, 4) for k in range(3)], out)
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 13
    assert lines[1].split(",")[:3] == ["0", "1", "generator"]


def test_csv_empty(tmp_path):
    out = tmp_path / "r.csv"
    write_records([], out)
    assert out.read_text() == ",".join(CSV_HEADER) + "\n"


def test_csv_full_precision(tmp_path):
    rec = _record(0, 2)
    rec.price = 0.1 + 0.2
    out = tmp_path / "r.csv"
    write_records([rec], out)
    assert float(out.read_text().splitlines()[1].split(",")[5]) == 0.1 + 0.2


def test_golden_table1(tmp_path):
    out = tmp_path / "t1.csv"
    write_records(run_scenario(load_scenario(bundled_path("table1"))), out)
    data = out.read_bytes()
    head = (GOLDEN / "table1_seed42_head.csv").read_bytes()
    assert data.startswith(head)
    assert hashlib.sha256(data).hexdigest() == (GOLDEN / "table1_seed42.sha256").read_text().strip()


def test_random_edges_connected_and_seeded():
    from transactive.graph import Topology
    for seed in range(20):
        edges = random_connected_edges(range(1, 13), 4, seed)
        assert edges == random_connected_edges(range(1, 13), 4, seed)
        assert is_connected(Topology.from_edges(range(1, 13), edges))
        assert len(edges) == 11 + 4
