"""Spanning-tree overlay of small diameter.

Agents flood distance vectors until every agent knows its hop distance and
next hop to every other agent, exchange eccentricities, agree on the vertex
of minimum eccentricity (lowest id on ties) and attach to it along their
shortest-path next hops. The result is the shortest-path tree rooted at a
vertex center, whose diameter is at most one hop above the true minimum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .errors import CycleError, DisconnectedError, IncompleteTableError, UnknownAgentError
from .graph import AgentId, Topology, neighbors
from .network import DistanceAnnounce, EccentricityAnnounce, ParentSelect, RoundNetwork


class Route(NamedTuple):
    distance: int
    next_hop: AgentId


DistanceTable = dict  # AgentId -> Route


@dataclass(frozen=True)
class TreeOverlay:
    root: AgentId
    parent: Mapping[AgentId, AgentId]
    tree_neighbors: Mapping[AgentId, frozenset]
    tree_diameter: int

    @property
    def nodes(self) -> list[AgentId]:
        return sorted(self.parent)

    @property
    def edges(self) -> list[tuple[AgentId, AgentId]]:
        return sorted((min(a, p), max(a, p)) for a, p in self.parent.items() if a != p)

    def degree(self, a: AgentId) -> int:
        return len(self.tree_neighbors[a])


class _DistanceVectorAgent:
    def __init__(self, me: AgentId):
        self.me = me
        self.table: DistanceTable = {me: Route(0, me)}
        self.fresh = [me]
        self.done = False

    def emit(self, net: RoundNetwork) -> None:
        for dest in self.fresh:
            net.broadcast(self.me, DistanceAnnounce(dest, self.table[dest].distance))
        self.fresh = []

    def receive(self, inbox) -> None:
        best: dict[AgentId, Route] = {}
        for msg in inbox:
            dest, dist = msg.payload
            cand = Route(dist + 1, msg.sender)
            if dest in self.table:
                continue
            if dest not in best or cand < best[dest]:
                best[dest] = cand
        for dest in sorted(best):
            self.table[dest] = best[dest]
            self.fresh.append(dest)
        # in a synchronous flood, a round with nothing new means nothing is left
        if not best:
            self.done = True


def _flood_tables(topology: Topology, net: RoundNetwork):
    agents = {a: _DistanceVectorAgent(a) for a in topology.nodes}
    net.open_phase("apsp", topology.adjacency)
    rounds = 0
    limit = len(topology) + 1
    while not all(ag.done for ag in agents.values()):
        if rounds > limit:
            break
        for ag in agents.values():
            ag.emit(net)
        inbox = net.deliver()
        rounds += 1
        for a, ag in agents.items():
            ag.receive(inbox.get(a, ()))
    tables = {a: dict(sorted(ag.table.items())) for a, ag in agents.items()}
    for a, t in tables.items():
        if len(t) != len(topology):
            raise DisconnectedError(f"agent {a} learned only {len(t)} of {len(topology)} destinations")
    return tables, rounds


def distributed_apsp(topology: Topology, network: RoundNetwork | None = None) -> dict[AgentId, DistanceTable]:
    """Per-agent distance tables from round-synchronous distance-vector flooding."""
    tables, _ = _flood_tables(topology, network or RoundNetwork())
    return tables


def _table_eccentricity(table: DistanceTable) -> int:
    return max(r.distance for r in table.values())


def elect_center(tables: Mapping[AgentId, DistanceTable]) -> AgentId:
    nodes = set(tables)
    if not nodes:
        raise IncompleteTableError("no distance tables")
    for a, t in tables.items():
        if set(t) != nodes:
            raise IncompleteTableError(f"table of agent {a} does not cover every agent")
    return min(nodes, key=lambda a: (_table_eccentricity(tables[a]), a))


def _tree_diameter(adj: Mapping[AgentId, frozenset]) -> int:
    def far(src):
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for a in frontier:
                for b in adj[a]:
                    if b not in dist:
                        dist[b] = dist[a] + 1
                        nxt.append(b)
            frontier = nxt
        end = max(dist, key=lambda a: (dist[a], -a))
        return end, dist[end]
    if len(adj) == 1:
        return 0
    end, _ = far(min(adj))
    return far(end)[1]


def overlay_from_parents(parent: Mapping[AgentId, AgentId], root: AgentId,
                         topology: Topology | None = None) -> TreeOverlay:
    """Validate a parent map and wrap it as a :class:`TreeOverlay`."""
    if parent.get(root) != root:
        raise CycleError(f"root {root} must be its own parent")
    for a, p in parent.items():
        if p not in parent:
            raise UnknownAgentError(p)
        if topology is not None and a != p and p not in neighbors(topology, a):
            raise CycleError(f"tree edge ({a},{p}) is not a communication link")
    for a in parent:
        seen = {a}
        x = a
        while x != root:
            x = parent[x]
            if x in seen:
                raise CycleError(f"parent pointers from {a} loop back to {x}")
            seen.add(x)
    adj = {a: set() for a in parent}
    for a, p in parent.items():
        if a != p:
            adj[a].add(p)
            adj[p].add(a)
    frozen = {a: frozenset(n) for a, n in sorted(adj.items())}
    return TreeOverlay(root, dict(sorted(parent.items())), frozen, _tree_diameter(frozen))


def build_tree(topology: Topology, tables: Mapping[AgentId, DistanceTable], center: AgentId) -> TreeOverlay:
    parent = {}
    for a in topology.nodes:
        try:
            parent[a] = a if a == center else tables[a][center].next_hop
        except KeyError:
            raise IncompleteTableError(f"agent {a} has no route to center {center}") from None
    return overlay_from_parents(parent, center, topology)


def run_mdst_protocol(topology: Topology, network: RoundNetwork | None = None) -> tuple[TreeOverlay, int]:
    """Full message-driven construction; returns the overlay and rounds used.

    Eccentricities are flooded once each agent's table is final; each agent
    then elects the center on its own, and children announce themselves to
    their parents so every agent knows its tree neighbors.
    """
    net = network or RoundNetwork()
    start = net.round
    tables, _ = _flood_tables(topology, net)

    known = {a: {a: _table_eccentricity(tables[a])} for a in topology.nodes}
    fresh = {a: [a] for a in topology.nodes}
    net.open_phase("eccentricity", topology.adjacency)
    while any(fresh.values()):
        for a in topology.nodes:
            for who in fresh[a]:
                net.broadcast(a, EccentricityAnnounce(who, known[a][who]))
            fresh[a] = []
        inbox = net.deliver()
        for a in topology.nodes:
            for msg in inbox.get(a, ()):
                who, ecc = msg.payload
                if who not in known[a]:
                    known[a][who] = ecc
                    fresh[a].append(who)

    choices = {a: min(k, key=lambda b: (k[b], b)) for a, k in known.items()}
    if len(set(choices.values())) != 1:
        raise DisconnectedError("agents disagree on the elected center")
    center = choices[topology.nodes[0]]

    parent = {a: (a if a == center else tables[a][center].next_hop) for a in topology.nodes}
    net.open_phase("attach", topology.adjacency)
    for a, p in parent.items():
        if a != p:
            net.send(a, p, ParentSelect(center))
    inbox = net.deliver()
    children = {a: {m.sender for m in inbox.get(a, ())} for a in topology.nodes}
    tree = overlay_from_parents(parent, center, topology)
    for a in topology.nodes:
        expected = set(tree.tree_neighbors[a])
        local = children[a] | ({parent[a]} if parent[a] != a else set())
        if local != expected:
            raise CycleError(f"agent {a} sees tree neighbors {sorted(local)}, expected {sorted(expected)}")
    return tree, net.round - start
