"""Hypothesis strategies for graphs and trees."""
from hypothesis import strategies as st

from transactive.graph import Topology


@st.composite
def trees(draw, min_nodes=1, max_nodes=50):
    n = draw(st.integers(min_nodes, max_nodes))
    ids = draw(st.permutations(range(1, n + 1)))
    edges = [(ids[i], ids[draw(st.integers(0, i - 1))]) for i in range(1, n)]
    return Topology.from_edges(ids, edges)


@st.composite
def connected_graphs(draw, min_nodes=1, max_nodes=12):
    base = draw(trees(min_nodes, max_nodes))
    nodes = base.nodes
    pairs = [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]
    extra = draw(st.lists(st.sampled_from(pairs), max_size=2 * len(nodes))) if pairs else []
    return Topology.from_edges(nodes, base.edges + extra)
