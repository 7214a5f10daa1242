"""Undirected, unweighted communication graphs over integer agent ids."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import DisconnectedError, EmptyTopologyError, TopologyError, UnknownAgentError

AgentId = int


@dataclass(frozen=True)
class Topology:
    """Immutable adjacency-set graph.

    Build one with :meth:`from_edges`; the constructor is for callers that
    already hold a symmetric adjacency map. Connectivity is checked eagerly
    unless ``require_connected=False``.
    """

    adjacency: Mapping[AgentId, frozenset[AgentId]]
    require_connected: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        adj = {int(a): frozenset(int(b) for b in nbrs) for a, nbrs in self.adjacency.items()}
        for a, nbrs in adj.items():
            if a <= 0:
                raise TopologyError(f"agent ids must be positive integers, got {a}")
            if a in nbrs:
                raise TopologyError(f"self-loop on agent {a}")
            for b in nbrs:
                if b not in adj:
                    raise UnknownAgentError(b)
                if a not in adj[b]:
                    raise TopologyError(f"edge ({a},{b}) is not symmetric")
        object.__setattr__(self, "adjacency", dict(sorted(adj.items())))
        if self.require_connected and not adj:
            raise EmptyTopologyError("topology has no nodes")
        if self.require_connected and not is_connected(self):
            raise DisconnectedError("communication graph is not connected")

    @classmethod
    def from_edges(cls, nodes: Iterable[AgentId], edges: Iterable[tuple[AgentId, AgentId]],
                   require_connected: bool = True) -> "Topology":
        adj: dict[int, set[int]] = {int(a): set() for a in nodes}
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise TopologyError(f"self-loop on agent {a}")
            for x in (a, b):
                if x not in adj:
                    raise UnknownAgentError(x)
            adj[a].add(b)
            adj[b].add(a)
        return cls({a: frozenset(n) for a, n in adj.items()}, require_connected=require_connected)

    @property
    def nodes(self) -> list[AgentId]:
        return list(self.adjacency)

    @property
    def edges(self) -> list[tuple[AgentId, AgentId]]:
        return sorted((a, b) for a, nbrs in self.adjacency.items() for b in nbrs if a < b)

    def __len__(self) -> int:
        return len(self.adjacency)

    def __contains__(self, a) -> bool:
        return a in self.adjacency

    def degree(self, a: AgentId) -> int:
        return len(neighbors(self, a))

    def with_agent(self, a: AgentId, links: Iterable[AgentId]) -> "Topology":
        if a in self.adjacency:
            raise TopologyError(f"agent {a} already present")
        adj = {x: set(n) for x, n in self.adjacency.items()}
        adj[a] = set()
        for b in links:
            if b not in self.adjacency:
                raise UnknownAgentError(b)
            adj[a].add(b)
            adj[b].add(a)
        return Topology({x: frozenset(n) for x, n in adj.items()})

    def without_agents(self, gone: Iterable[AgentId]) -> "Topology":
        gone = set(gone)
        for a in gone:
            if a not in self.adjacency:
                raise UnknownAgentError(a)
        adj = {x: frozenset(n - gone) for x, n in self.adjacency.items() if x not in gone}
        if not adj:
            raise EmptyTopologyError("removing these agents empties the network")
        return Topology(adj)


def neighbors(topology: Topology, a: AgentId) -> frozenset[AgentId]:
    try:
        return topology.adjacency[a]
    except KeyError:
        raise UnknownAgentError(a) from None


def _bfs(topology: Topology, source: AgentId) -> dict[AgentId, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        # ascending id order keeps traversal deterministic
        for b in sorted(topology.adjacency[a]):
            if b not in dist:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def is_connected(topology: Topology) -> bool:
    if not topology.adjacency:
        raise EmptyTopologyError("topology has no nodes")
    return len(_bfs(topology, min(topology.adjacency))) == len(topology.adjacency)


def bfs_distances(topology: Topology, source: AgentId) -> dict[AgentId, int]:
    """Hop counts from ``source`` to every node."""
    if source not in topology.adjacency:
        raise UnknownAgentError(source)
    dist = _bfs(topology, source)
    if len(dist) != len(topology.adjacency):
        raise DisconnectedError(f"not every node is reachable from {source}")
    return dist


def eccentricity(topology: Topology, a: AgentId) -> int:
    return max(bfs_distances(topology, a).values())


def diameter(topology: Topology) -> int:
    if not topology.adjacency:
        raise EmptyTopologyError("topology has no nodes")
    return max(eccentricity(topology, a) for a in topology.adjacency)


def radius(topology: Topology) -> int:
    if not topology.adjacency:
        raise EmptyTopologyError("topology has no nodes")
    return min(eccentricity(topology, a) for a in topology.adjacency)
