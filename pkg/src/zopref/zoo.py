"""Small fixed and randomly generated MDPs used by tests and diagnostics.

Three fixed instances: a one-state bandit with a hand-solvable Q table, a
two-state absorbing chain where improvement is easy to read off, and a
three-agent chain with seeded random tables for gradient cross-checks.
The random generators feed the bound-checking suites.
"""

from __future__ import annotations

import itertools

import numpy as np

from .graph import AgentGraph, chain
from .mdp import TableMdp, nbhd_state_space
from .policy import TabularPolicy


def bandit() -> TableMdp:
    """One agent, one state, two actions, rewards (1, 0), gamma 0.5."""
    g = AgentGraph(1, [])
    trans = [{((0,), a): np.array([1.0]) for a in (0, 1)}]
    rewards = [np.array([[1.0, 0.0]])]
    return TableMdp(g, [1], [2], trans, rewards, [(0,)], [1.0],
                    gamma=0.5, reward_bound=1.0)


def two_state_chain() -> TableMdp:
    """One agent, two states. Action 1 from state 0 usually reaches the
    absorbing reward state; action 0 stays put. gamma 0.9."""
    g = AgentGraph(1, [])
    trans = [{
        ((0,), 0): np.array([1.0, 0.0]),
        ((0,), 1): np.array([0.1, 0.9]),
        ((1,), 0): np.array([0.0, 1.0]),
        ((1,), 1): np.array([0.0, 1.0]),
    }]
    rewards = [np.array([[0.0, 0.0], [1.0, 1.0]])]
    return TableMdp(g, [2], [2], trans, rewards, [(0,)], [1.0],
                    gamma=0.9, reward_bound=1.0)


def three_agent_chain(seed: int = 7) -> TableMdp:
    """Three agents on a chain, two local states and actions each,
    seeded random transitions and rewards in [-1, 1], uniform start."""
    return random_mdp(np.random.default_rng(seed), n_agents=3,
                      state_sizes=(2, 2, 2), action_sizes=(2, 2, 2), gamma=0.9)


def random_mdp(rng: np.random.Generator, n_agents: int | None = None,
               state_sizes=None, action_sizes=None, gamma: float = 0.9,
               graph: AgentGraph | None = None) -> TableMdp:
    """Random factored MDP on a chain graph (unless a graph is given).

    Transition rows get a +0.1 floor before normalization so every local
    outcome stays reachable; rewards are uniform in [-1, 1] per (s_i, a_i).
    """
    if n_agents is None:
        n_agents = int(rng.integers(2, 4))
    if graph is None:
        graph = chain(n_agents)
    if state_sizes is None:
        state_sizes = [int(rng.integers(2, 4)) for _ in range(n_agents)]
    if action_sizes is None:
        action_sizes = [2] * n_agents
    state_sizes = list(state_sizes)
    action_sizes = list(action_sizes)

    trans = []
    for i in range(n_agents):
        rows = {}
        for nb in nbhd_state_space(graph, state_sizes, i):
            for a in range(action_sizes[i]):
                raw = rng.random(state_sizes[i]) + 0.1
                rows[(nb, a)] = raw / raw.sum()
        trans.append(rows)
    rewards = [rng.uniform(-1.0, 1.0, size=(state_sizes[i], action_sizes[i]))
               for i in range(n_agents)]

    states = list(itertools.product(*(range(k) for k in state_sizes)))
    probs = [1.0 / len(states)] * len(states)
    return TableMdp(graph, state_sizes, action_sizes, trans, rewards,
                    states, probs, gamma=gamma, reward_bound=1.0)


def random_graph(rng: np.random.Generator, max_agents: int = 12) -> AgentGraph:
    """Erdos-Renyi style graph with 2..max_agents agents; may be disconnected."""
    n = int(rng.integers(2, max_agents + 1))
    p = rng.uniform(0.15, 0.7)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return AgentGraph(n, edges)


def random_policy(mdp, rng: np.random.Generator, scale: float = 1.0) -> TabularPolicy:
    tables = [scale * rng.standard_normal((s, a))
              for s, a in zip(mdp.state_sizes, mdp.action_sizes)]
    return TabularPolicy(tables)
