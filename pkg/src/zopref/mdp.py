"""Factored MDP interface: per-agent state/action spaces, local transitions.

Local states and actions are plain indices. Agent i's transition sees only
the states of its closed 1-hop neighborhood (ordered as graph.khop(i, 1))
and its own action; the joint next state is the product of independent
per-agent draws. Rewards may depend on episodic bookkeeping (first-visit
flags, captured prey), which lives in an explicit per-rollout book object
rather than inside the state. Environments that can express their rewards
as pure functions of an (augmented) state expose that via markov_view(),
which is what the exact solvers consume.
"""

from __future__ import annotations

import itertools
from bisect import bisect_right
from typing import Optional, Sequence

import numpy as np

from .graph import AgentGraph


class FactoredMdp:
    """Base class. Subclasses fill in the attributes and methods below."""

    graph: AgentGraph
    gamma: float
    reward_bound: float
    state_sizes: list[int]
    action_sizes: list[int]
    # True when every transition row is a point mass (saves nothing in the
    # draw schedule, but lets tabularize skip normalization checks)
    deterministic: bool = False

    def transition(self, i: int, nbhd_states: tuple[int, ...], action: int):
        """Distribution of agent i's next local state.

        nbhd_states is ordered as self.graph.khop(i, 1) (sorted, includes i).
        Returns (outcomes, probs) with probs summing to 1.
        """
        raise NotImplementedError

    def initial_states(self):
        """Initial joint-state distribution as (states, probs)."""
        raise NotImplementedError

    def fresh_book(self):
        """New episodic bookkeeping for one rollout. None when stateless."""
        return None

    def rewards(self, state, action, book) -> np.ndarray:
        """Per-agent rewards for (state, action); may consult and update book."""
        raise NotImplementedError

    def markov_view(self) -> Optional["FactoredMdp"]:
        """Equivalent book-free MDP on an augmented state space, if any."""
        return None

    def lift_policy(self, policy):
        """Express a policy over this MDP's own state space.

        Views with augmented states override this to replicate the base
        rows (the policy never sees the bookkeeping bits); for ordinary
        MDPs the policy already matches.
        """
        return policy

    # -- derived helpers ---------------------------------------------------

    def nbhd_of(self, i: int) -> tuple[int, ...]:
        return self.graph.khop(i, 1)

    def nbhd_states(self, state, i: int) -> tuple[int, ...]:
        return tuple(state[j] for j in self.graph.khop(i, 1))

    def transition_cdf(self, i: int, nbhd_states: tuple[int, ...], action: int):
        """Memoized (outcomes, cumulative probs) for fast sampling."""
        cache = getattr(self, "_cdf_cache", None)
        if cache is None:
            cache = self._cdf_cache = {}
        key = (i, nbhd_states, action)
        hit = cache.get(key)
        if hit is None:
            outcomes, probs = self.transition(i, nbhd_states, action)
            cum = []
            acc = 0.0
            for p in probs:
                acc += p
                cum.append(acc)
            cum[-1] = 1.0  # guard against float shortfall at the top
            hit = cache[key] = (tuple(outcomes), tuple(cum))
        return hit

    @property
    def total_states(self) -> int:
        n = 1
        for s in self.state_sizes:
            n *= s
        return n

    @property
    def total_actions(self) -> int:
        n = 1
        for a in self.action_sizes:
            n *= a
        return n


def sample_initial(mdp: FactoredMdp, rng: np.random.Generator):
    """Draw an initial joint state. Always consumes exactly one uniform."""
    states, probs = mdp.initial_states()
    u = rng.random()
    acc = 0.0
    for s, p in zip(states, probs):
        acc += p
        if u < acc:
            return s
    return states[-1]


def step(mdp: FactoredMdp, state, action, rng: np.random.Generator):
    """One joint transition; per-agent draws in agent order.

    Exactly one uniform is consumed per agent, even for point-mass rows,
    so the draw schedule is fixed and paired rollouts with shared streams
    stay aligned.
    """
    nxt = []
    for i in range(mdp.graph.n_agents):
        outcomes, cum = mdp.transition_cdf(i, mdp.nbhd_states(state, i), action[i])
        u = rng.random()
        if len(outcomes) == 1:
            nxt.append(outcomes[0])
        else:
            idx = bisect_right(cum, u)
            if idx >= len(outcomes):
                idx = len(outcomes) - 1
            nxt.append(outcomes[idx])
    return tuple(nxt)


def enumerate_joint(mdp: FactoredMdp, cap: int = 1_000_000):
    """All joint states and joint actions in lexicographic order.

    Raises ValueError when either product exceeds cap; callers that only
    need rollouts never enumerate.
    """
    ns, na = mdp.total_states, mdp.total_actions
    if ns > cap or na > cap:
        raise ValueError(
            f"joint space too large to enumerate: {ns} states, {na} actions, cap {cap}"
        )
    states = list(itertools.product(*(range(k) for k in mdp.state_sizes)))
    actions = list(itertools.product(*(range(k) for k in mdp.action_sizes)))
    return states, actions


class TableMdp(FactoredMdp):
    """Factored MDP given by explicit per-agent tables.

    trans[i] maps (nbhd_states, action) -> probability row over agent i's
    local states. rewards[i] is an (S_i, A_i) array: agent rewards depend
    on the agent's own state and action. Rewards are pure, so the table
    MDP is its own markov view.
    """

    def __init__(self, graph, state_sizes, action_sizes, trans, reward_tables,
                 init_states, init_probs, gamma, reward_bound):
        self.graph = graph
        self.state_sizes = list(state_sizes)
        self.action_sizes = list(action_sizes)
        self._trans = trans
        self.reward_tables = [np.asarray(t, dtype=float) for t in reward_tables]
        self._init = (list(init_states), list(init_probs))
        self.gamma = float(gamma)
        self.reward_bound = float(reward_bound)
        for i, t in enumerate(self.reward_tables):
            if t.shape != (state_sizes[i], action_sizes[i]):
                raise ValueError(f"reward table {i} has shape {t.shape}")
            if np.max(np.abs(t)) > self.reward_bound + 1e-12:
                raise ValueError(f"reward table {i} exceeds declared bound {reward_bound}")

    def transition(self, i, nbhd_states, action):
        row = self._trans[i][(nbhd_states, action)]
        return tuple(range(self.state_sizes[i])), tuple(row)

    def initial_states(self):
        return self._init

    def rewards(self, state, action, book=None):
        return np.array(
            [self.reward_tables[i][state[i], action[i]] for i in range(self.graph.n_agents)]
        )

    def markov_view(self):
        return self


def nbhd_state_space(graph: AgentGraph, state_sizes: Sequence[int], i: int):
    """Iterate every joint assignment of agent i's closed 1-hop neighborhood."""
    sizes = [state_sizes[j] for j in graph.khop(i, 1)]
    return itertools.product(*(range(k) for k in sizes))
