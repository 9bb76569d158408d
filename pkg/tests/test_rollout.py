"""Rollout determinism, neighborhood truncation, and trajectory rewards."""

import numpy as np
import pytest

from zopref.graph import AgentGraph, chain
from zopref.mdp import TableMdp
from zopref.policy import TabularPolicy
from zopref.preference import reward_diff_range
from zopref.rollout import TruncatedTrajectory, rollout_joint, trajectory_reward, truncate
from zopref.seeding import stream
from zopref.zoo import random_mdp, random_policy, three_agent_chain


def test_same_stream_gives_identical_trajectories():
    mdp = three_agent_chain()
    policy = random_policy(mdp, np.random.default_rng(0), scale=0.5)
    a = rollout_joint(mdp, policy, 12, stream(3, 1))
    b = rollout_joint(mdp, policy, 12, stream(3, 1))
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.actions, b.actions)
    assert np.array_equal(a.rewards, b.rewards)
    c = rollout_joint(mdp, policy, 12, stream(4, 1))
    assert not np.array_equal(a.states, c.states)


def _deterministic_mdp():
    g = AgentGraph(2, [(0, 1)])
    trans = []
    for i in range(2):
        rows = {}
        for nb in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            for a in range(2):
                nxt = 1 if a == 1 else nb[0 if i == 0 else 1]
                row = np.zeros(2)
                row[nxt] = 1.0
                rows[(nb, a)] = row
        trans.append(rows)
    rewards = [np.array([[0.0, 0.0], [1.0, 1.0]])] * 2
    return TableMdp(g, [2, 2], [2, 2], trans, rewards, [(0, 0)], [1.0],
                    gamma=0.9, reward_bound=1.0)


def test_deterministic_dynamics_ignore_the_stream():
    mdp = _deterministic_mdp()
    policy = TabularPolicy([np.array([[0.0, 50.0], [0.0, 50.0]])] * 2)
    a = rollout_joint(mdp, policy, 6, stream(0, 0))
    b = rollout_joint(mdp, policy, 6, stream(99, 5))
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.actions, b.actions)


def test_single_step_shapes_and_validation():
    mdp = three_agent_chain()
    policy = TabularPolicy.for_mdp(mdp)
    traj = rollout_joint(mdp, policy, 1, stream(0, 7))
    assert traj.states.shape == (1, 3)
    assert traj.horizon == 1 and traj.n_agents == 3
    with pytest.raises(ValueError):
        rollout_joint(mdp, policy, 0, stream(0, 7))


def test_truncation_membership():
    mdp = random_mdp(np.random.default_rng(1), n_agents=4,
                     state_sizes=(2, 2, 2, 2), action_sizes=(2, 2, 2, 2),
                     graph=chain(4))
    policy = TabularPolicy.for_mdp(mdp)
    traj = rollout_joint(mdp, policy, 5, stream(0, 8))

    own = truncate(traj, mdp.graph, 2, 0)
    assert own.members == (2,)
    assert np.array_equal(own.states[:, 0], traj.states[:, 2])

    near = truncate(traj, mdp.graph, 1, 1)
    assert near.members == (0, 1, 2)
    assert np.array_equal(near.rewards, traj.rewards[:, [0, 1, 2]])

    everyone = truncate(traj, mdp.graph, 2, 3)
    assert everyone.members == (0, 1, 2, 3)
    assert np.array_equal(everyone.states, traj.states)


def _tt(rewards, members):
    rewards = np.asarray(rewards, dtype=float)
    h, m = rewards.shape
    return TruncatedTrajectory(
        agent=members[0], members=tuple(members),
        states=np.zeros((h, m), dtype=np.int32),
        actions=np.zeros((h, m), dtype=np.int32),
        rewards=rewards,
    )


def test_trajectory_reward_frozen_values():
    assert trajectory_reward(_tt(np.zeros((4, 2)), (0, 1)), 0.9, 3) == 0.0
    # single agent, rewards (1, 1) at gamma 0.5: 1 + 0.5
    assert trajectory_reward(_tt([[1.0], [1.0]], (0,)), 0.5, 1) == pytest.approx(1.5)
    # three members paying 1 at the first step only, averaged over N=4
    assert trajectory_reward(_tt([[1.0, 1.0, 1.0]], (0, 1, 2)), 0.9, 4) == pytest.approx(0.75)


def test_trajectory_reward_respects_global_bound():
    mdp = three_agent_chain()
    policy = random_policy(mdp, np.random.default_rng(2), scale=0.4)
    cap = reward_diff_range(mdp.reward_bound, mdp.gamma, 10) / 2.0
    for r in range(20):
        traj = rollout_joint(mdp, policy, 10, stream(5, r))
        for i in range(3):
            for kappa in (0, 1, 2):
                rhat = trajectory_reward(truncate(traj, mdp.graph, i, kappa),
                                         mdp.gamma, 3)
                assert abs(rhat) <= cap + 1e-12
