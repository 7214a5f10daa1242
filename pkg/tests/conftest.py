import pytest

from transactive.graph import Topology


def path(n: int) -> Topology:
    return Topology.from_edges(range(1, n + 1), [(i, i + 1) for i in range(1, n)])


def cycle(n: int) -> Topology:
    return Topology.from_edges(range(1, n + 1), [(i, i % n + 1) for i in range(1, n + 1)])


def star(hub: int, leaves) -> Topology:
    return Topology.from_edges([hub, *leaves], [(hub, x) for x in leaves])


@pytest.fixture
def path3():
    return path(3)


@pytest.fixture
def square():
    return cycle(4)
