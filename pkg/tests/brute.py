"""Exhaustive reference computations for small instances."""
from __future__ import annotations

import itertools
from collections import deque


def _diameter(nodes, edges) -> int:
    adj = {a: [] for a in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    best = 0
    for s in nodes:
        dist = {s: 0}
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    q.append(y)
        best = max(best, max(dist.values()))
    return best


def spanning_trees(nodes, edges):
    """Every spanning tree, as an edge list, by testing all (n-1)-subsets."""
    nodes = list(nodes)
    for subset in itertools.combinations(edges, len(nodes) - 1):
        root = {a: a for a in nodes}

        def find(x):
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        ok = True
        for a, b in subset:
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            root[ra] = rb
        if ok:
            yield list(subset)


def min_spanning_tree_diameter(nodes, edges) -> int:
    if len(nodes) == 1:
        return 0
    return min(_diameter(nodes, t) for t in spanning_trees(nodes, edges))


def tree_diameter(nodes, edges) -> int:
    return _diameter(nodes, edges)
