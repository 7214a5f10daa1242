import itertools

import pytest
from hypothesis import given, settings

from conftest import path, star
from strategies import connected_graphs
from transactive.errors import DisconnectedError, EmptyTopologyError, TopologyError, UnknownAgentError
from transactive.graph import (Topology, bfs_distances, diameter, eccentricity, is_connected,
                               neighbors, radius)


def test_neighbors_examples(path3, square):
    assert neighbors(path3, 2) == {1, 3}
    assert neighbors(path3, 1) == {2}
    assert neighbors(square, 1) == {2, 4}


def test_neighbors_unknown_agent(path3):
    with pytest.raises(UnknownAgentError):
        neighbors(path3, 9)


def test_is_connected_examples(path3):
    assert is_connected(path3)
    assert not is_connected(Topology.from_edges([1, 2], [], require_connected=False))
    assert is_connected(Topology.from_edges([1], []))


def test_disconnected_rejected_eagerly():
    with pytest.raises(DisconnectedError):
        Topology.from_edges([1, 2, 3], [(1, 2)])


@pytest.mark.parametrize("adjacency", [
    {},
    {1: {1}},
    {1: {2}, 2: set()},
    {0: {1}, 1: {0}},
])
def test_invalid_adjacency(adjacency):
    with pytest.raises(TopologyError):
        Topology({a: frozenset(n) for a, n in adjacency.items()})


def test_empty_is_its_own_error():
    with pytest.raises(EmptyTopologyError):
        Topology({})


def test_bfs_distances_examples(path3, square):
    assert bfs_distances(path3, 1) == {1: 0, 2: 1, 3: 2}
    assert bfs_distances(square, 1) == {1: 0, 2: 1, 3: 2, 4: 1}
    assert bfs_distances(star(1, [2, 3, 4]), 2) == {2: 0, 1: 1, 3: 2, 4: 2}


def test_eccentricity_examples(path3, square):
    assert eccentricity(path3, 2) == 1
    assert eccentricity(path3, 1) == 2
    assert eccentricity(square, 3) == 2


def test_diameter_examples(path3):
    assert diameter(path3) == 2
    assert diameter(star(1, [2, 3, 4])) == 2
    assert diameter(Topology.from_edges([7], [])) == 0


def test_membership_changes():
    t = path(3).with_agent(4, [3])
    assert neighbors(t, 4) == {3}
    assert t.without_agents([4]) == path(3)
    with pytest.raises(DisconnectedError):
        t.without_agents([2])


@settings(max_examples=60, deadline=None)
@given(connected_graphs())
def test_diameter_radius_relations(g):
    ecc = [eccentricity(g, a) for a in g.nodes]
    assert diameter(g) == max(ecc)
    assert radius(g) == min(ecc)
    assert radius(g) <= diameter(g) <= 2 * radius(g)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_nodes=8))
def test_triangle_inequality_and_symmetry(g):
    dist = {a: bfs_distances(g, a) for a in g.nodes}
    for a, b, c in itertools.product(g.nodes, repeat=3):
        assert dist[a][c] <= dist[a][b] + dist[b][c]
    for a, b in itertools.product(g.nodes, repeat=2):
        assert (b in neighbors(g, a)) == (a in neighbors(g, b))
