"""Command line entry point: ``transactive run|verify|tree|oracle``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .engine import SimulationError, simulate
from .errors import ScenarioError, TransactiveError
from .mdst import run_mdst_protocol
from .oracle import solve_market, solve_welfare
from .scenario import resolve_scenario, write_records

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transactive",
                                description="Distributed transactive energy dispatch simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="simulate a scenario and write per-iteration CSV")
    run.add_argument("scenario", help="scenario file, or the name of a bundled scenario")
    run.add_argument("--out", required=True, help="CSV output path")
    run.add_argument("--plot", metavar="DIR", help="also write PNG line charts to DIR")
    ver = sub.add_parser("verify", help="simulate and compare the final state with the oracle")
    ver.add_argument("scenario")
    tree = sub.add_parser("tree", help="print the spanning tree the agents elect")
    tree.add_argument("scenario")
    orc = sub.add_parser("oracle", help="print the centralized solution only")
    orc.add_argument("scenario")
    return p


def _oracle_for(agents, price):
    return solve_welfare(agents, price) if price is not None else solve_market(agents)


def _cmd_run(sc, args) -> int:
    sim = simulate(sc)
    write_records(sim.records, args.out)
    print(f"wrote {len(sim.records)} iterations to {args.out}")
    if args.plot:
        from .plotting import plot_records
        for path in plot_records(sim.records, args.plot, sc.names):
            print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(sc, args) -> int:
    sim = simulate(sc)
    final = list(sim.states.values())
    sol = _oracle_for(final, sc.price)
    print(f"iterations: {sim.k}   oracle price: {sol.price:.6g}")
    print(f"{'agent':>6} {'kind':>9} {'simulated':>14} {'oracle':>14} {'abs gap':>11} {'rel gap':>10}")
    worst = 0.0
    for s in final:
        want = sol.powers[s.id]
        gap = abs(s.power - want)
        rel = gap / max(abs(want), 1.0)
        worst = max(worst, rel)
        print(f"{s.id:>6} {s.kind.value:>9} {s.power:>14.6f} {want:>14.6f} {gap:>11.3e} {rel:>10.3e}")
    gen = sum(s.power for s in final if s.is_generator)
    dem = sum(s.params.base_load + s.power for s in final if not s.is_generator)
    print(f"max relative gap: {worst:.3e}")
    print(f"final imbalance P_G - P_D: {gen - dem:.3e} W ({abs(gen - dem) / dem:.3e} of P_D)")
    return EXIT_OK


def _cmd_tree(sc, args) -> int:
    tree, rounds = run_mdst_protocol(sc.topology())
    print(f"center: {tree.root}")
    print(f"tree diameter: {tree.tree_diameter}")
    print(f"protocol rounds: {rounds}")
    print("parents:")
    for a in sorted(tree.parent):
        print(f"  {a} -> {tree.parent[a]}")
    return EXIT_OK


def _cmd_oracle(sc, args) -> int:
    sol = _oracle_for(sc.agents, sc.price)
    print(f"price: {sol.price!r}")
    print(f"multiplier: {sol.multiplier!r}")
    print(f"social welfare: {sol.welfare!r}")
    for a in sorted(sol.powers):
        print(f"  {a}: {sol.powers[a]!r}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "verify": _cmd_verify, "tree": _cmd_tree, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TRANSACTIVE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        sc = resolve_scenario(args.scenario)
    except ScenarioError as exc:
        for line in getattr(exc, "problems", None) or [str(exc)]:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return _COMMANDS[args.command](sc, args)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if getattr(args, "out", None):
            write_records(exc.records, args.out)
            print(f"partial results ({len(exc.records)} iterations) in {args.out}", file=sys.stderr)
        return EXIT_RUNTIME
    except (TransactiveError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
