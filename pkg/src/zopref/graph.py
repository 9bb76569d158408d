"""Undirected agent communication graphs and k-hop neighborhoods."""

from __future__ import annotations

from typing import Iterable, Sequence


class AgentGraph:
    """Immutable simple undirected graph on agents 0..n_agents-1.

    Neighborhoods follow the convention used throughout the library: the
    k-hop neighborhood of i contains every agent within graph distance k,
    including i itself (so khop(i, 0) == (i,)).
    """

    def __init__(self, n_agents: int, edges: Iterable[Sequence[int]]):
        if n_agents < 1:
            raise ValueError(f"n_agents must be >= 1, got {n_agents}")
        self.n_agents = int(n_agents)
        seen = set()
        adj = [[] for _ in range(self.n_agents)]
        for e in edges:
            a, b = int(e[0]), int(e[1])
            if not (0 <= a < self.n_agents and 0 <= b < self.n_agents):
                raise ValueError(f"edge ({a},{b}) out of range for {self.n_agents} agents")
            if a == b:
                raise ValueError(f"self-loop at agent {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            adj[a].append(b)
            adj[b].append(a)
        self.edges = tuple(sorted(seen))
        self._adj = tuple(tuple(sorted(v)) for v in adj)
        self._khop_cache: dict[tuple[int, int], tuple[int, ...]] = {}

    def neighbors(self, i: int) -> tuple[int, ...]:
        """1-hop neighbors of i, excluding i."""
        return self._adj[i]

    def khop(self, i: int, kappa: int) -> tuple[int, ...]:
        """Sorted agents within graph distance kappa of i (i included)."""
        if not 0 <= i < self.n_agents:
            raise ValueError(f"agent {i} out of range")
        if kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {kappa}")
        key = (i, kappa)
        hit = self._khop_cache.get(key)
        if hit is not None:
            return hit
        # plain BFS; graphs here are tiny so no frontier tricks
        dist = {i: 0}
        frontier = [i]
        d = 0
        while frontier and d < kappa:
            d += 1
            nxt = []
            for u in frontier:
                for v in self._adj[u]:
                    if v not in dist:
                        dist[v] = d
                        nxt.append(v)
            frontier = nxt
        out = tuple(sorted(dist))
        self._khop_cache[key] = out
        return out

    def khop_complement(self, i: int, kappa: int) -> tuple[int, ...]:
        """Sorted agents strictly farther than kappa hops from i."""
        inside = set(self.khop(i, kappa))
        return tuple(j for j in range(self.n_agents) if j not in inside)

    def __repr__(self):
        return f"AgentGraph(n_agents={self.n_agents}, edges={list(self.edges)})"


def chain(n: int) -> AgentGraph:
    """Path graph 0-1-...-(n-1)."""
    return AgentGraph(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> AgentGraph:
    """Agent 0 connected to everyone else."""
    return AgentGraph(n, [(0, i) for i in range(1, n)])


def complete(n: int) -> AgentGraph:
    return AgentGraph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
