"""Exact network sums in a fixed number of rounds.

Ten agents on a random mesh agree on a spanning tree, then every agent
learns the total of everybody's value after exactly ``tree_diameter``
exchanges with its tree neighbors.
"""
from transactive import Topology, finite_time_sum, run_mdst_protocol
from transactive.network import RoundNetwork
from transactive.scenario import random_connected_edges

ids = list(range(1, 11))
mesh = Topology.from_edges(ids, random_connected_edges(ids, extra=6, seed=7))
print("mesh edges:", mesh.edges)

tree, rounds = run_mdst_protocol(mesh)
print(f"center {tree.root}, tree diameter {tree.tree_diameter}, built in {rounds} rounds")
print("tree edges:", tree.edges)

values = {a: a * a for a in ids}
net = RoundNetwork()
totals = finite_time_sum(tree, values, net)
print(f"true total {sum(values.values())}; every agent holds {set(totals.values())} "
      f"after {net.round} rounds")
