"""Joint rollouts and neighborhood-truncated trajectory rewards."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graph import AgentGraph
from .mdp import FactoredMdp, sample_initial, step
from .policy import TabularPolicy


@dataclass
class Trajectory:
    """H recorded steps; states[h] is the joint state the actions saw."""

    states: np.ndarray   # (H, N) int32
    actions: np.ndarray  # (H, N) int32
    rewards: np.ndarray  # (H, N) float64

    @property
    def horizon(self) -> int:
        return self.states.shape[0]

    @property
    def n_agents(self) -> int:
        return self.states.shape[1]


@dataclass
class TruncatedTrajectory:
    """The columns of a joint trajectory visible to one agent's neighborhood."""

    agent: int
    members: tuple[int, ...]  # khop(agent, kappa), sorted, includes agent
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray

    @property
    def horizon(self) -> int:
        return self.states.shape[0]


def rollout_joint(mdp: FactoredMdp, policy: TabularPolicy, horizon: int,
                  rng: np.random.Generator) -> Trajectory:
    """Execute the joint policy for `horizon` steps from a fresh episode.

    Draw order is fixed: one uniform for the initial state, then per step
    one uniform per agent for actions followed by one per agent for
    transitions. Rewards are computed at collection time against the
    episode book (first-visit flags and the like live there, not in the
    state).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    n = mdp.graph.n_agents
    states = np.empty((horizon, n), dtype=np.int32)
    actions = np.empty((horizon, n), dtype=np.int32)
    rewards = np.empty((horizon, n), dtype=np.float64)

    state = sample_initial(mdp, rng)
    book = mdp.fresh_book()
    for h in range(horizon):
        action = policy.sample_joint_action(state, rng)
        states[h] = state
        actions[h] = action
        rewards[h] = mdp.rewards(state, action, book)
        state = step(mdp, state, action, rng)
    return Trajectory(states, actions, rewards)


def truncate(traj: Trajectory, graph: AgentGraph, agent: int, kappa: int) -> TruncatedTrajectory:
    """Restrict a joint trajectory to agent's kappa-hop neighborhood."""
    members = graph.khop(agent, kappa)
    cols = list(members)
    return TruncatedTrajectory(
        agent=agent,
        members=members,
        states=traj.states[:, cols],
        actions=traj.actions[:, cols],
        rewards=traj.rewards[:, cols],
    )


_WEIGHTS: dict[tuple[float, int], np.ndarray] = {}


def discount_weights(gamma: float, horizon: int) -> np.ndarray:
    key = (gamma, horizon)
    w = _WEIGHTS.get(key)
    if w is None:
        w = _WEIGHTS[key] = gamma ** np.arange(horizon)
    return w


def trajectory_reward(tt: TruncatedTrajectory, gamma: float, n_agents: int) -> float:
    """Discounted neighborhood reward, averaged over the full agent count.

    (1/N) sum_h gamma^h sum_{j in members} r_{j,h}; the 1/N (not 1/|members|)
    keeps truncated rewards comparable across neighborhood sizes.
    """
    w = discount_weights(gamma, tt.horizon)
    return float(w @ tt.rewards.sum(axis=1)) / n_agents


def dump_trajectory(traj: Trajectory, fh) -> None:
    """Debug aid: one JSON line per step. Not part of any contract."""
    for h in range(traj.horizon):
        fh.write(json.dumps({
            "h": h,
            "states": traj.states[h].tolist(),
            "actions": traj.actions[h].tolist(),
            "rewards": traj.rewards[h].tolist(),
        }))
        fh.write("\n")
