"""A consumer joins, then two consumers leave.

Each membership change rebuilds the spanning tree before the next
iteration. The newcomer's copy of the balance multiplier comes from its
lowest-id neighbor.
"""
from transactive import bundled_path, load_scenario, simulate

sc = load_scenario(bundled_path("membership"))
sim = simulate(sc)

for k, tree in sim.tree_history:
    print(f"overlay at k={k}: center {tree.root}, diameter {tree.tree_diameter}, "
          f"{len(tree.nodes)} agents")

for label, k in (("before join", 749), ("after join", 1499), ("after leave", 2249)):
    r = sim.records[k]
    print(f"{label:>12}: price {r.price:.5f}, generation {r.P_G:8.1f} W, "
          f"{sum(1 for x in r.kind.values() if x == 'consumer')} consumers")
