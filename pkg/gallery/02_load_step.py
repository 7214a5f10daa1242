"""Five generators and five smart loads absorb a base-load step.

At iteration 750 two loads gain 1000 W of fixed demand. Generators pick it
up within a couple of iterations and the price settles a little higher.
Pass an output directory to also get PNG charts.
"""
import sys

from transactive import bundled_path, load_scenario, simulate
from transactive.oracle import solve_market

sc = load_scenario(bundled_path("table1"))
sim = simulate(sc)
recs = sim.records

for k in (0, 100, 749, 750, 751, 800, len(recs) - 1):
    r = recs[k]
    gens = [round(p) for a, p in sorted(r.power.items()) if r.kind[a] == "generator"]
    print(f"k={k:5d} price={r.price:.5f} P_G={r.P_G:9.1f} P_D={r.P_D:9.1f} generators={gens}")

ref = solve_market(list(sim.states.values()))
print(f"centralized price after the step: {ref.price:.5f}")

if len(sys.argv) > 1:
    from transactive.plotting import plot_records
    for path in plot_records(recs, sys.argv[1], sc.names):
        print("wrote", path)
