"""Exact solvers for enumerable factored MDPs.

Everything here works on a dense tabular view of the joint process:
per-agent Q functions from Bellman fixed-point iteration, discounted
state visitation, the exact policy gradient, and finite-horizon
neighborhood-truncated counterparts computed by backward induction.
These are the references the sampling-based learner is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import AgentGraph
from .mdp import FactoredMdp, enumerate_joint
from .policy import TabularPolicy


@dataclass
class Tabular:
    """Dense joint-space tables for one factored MDP."""

    graph: AgentGraph
    gamma: float
    reward_bound: float
    state_sizes: list[int]
    action_sizes: list[int]
    states: list[tuple[int, ...]]
    actions: list[tuple[int, ...]]
    trans: np.ndarray    # (S, A, S)
    rewards: np.ndarray  # (N, S, A)
    init: np.ndarray     # (S,)
    sidx: np.ndarray     # (N, S) local state of each agent per joint state
    aidx: np.ndarray     # (N, A)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_agents(self) -> int:
        return self.graph.n_agents


def tabularize(mdp: FactoredMdp, cap: int = 1_000_000) -> Tabular:
    """Build dense joint tables from a factored MDP.

    The MDP must be book-free (its own markov view); pass env.markov_view()
    for environments with episodic bookkeeping.
    """
    view = mdp.markov_view()
    if view is not mdp:
        raise ValueError(
            "tabularize needs a book-free MDP; pass mdp.markov_view() "
            "(None means there is no exact view)"
        )
    states, actions = enumerate_joint(mdp, cap)
    S, A, N = len(states), len(actions), mdp.graph.n_agents
    if S * S * A > 50_000_000:
        raise ValueError(f"dense transition table would need {S * S * A} entries")

    sidx = np.array(states, dtype=np.int64).T.copy()
    aidx = np.array(actions, dtype=np.int64).T.copy()
    state_pos = {s: k for k, s in enumerate(states)}

    trans = np.zeros((S, A, S))
    rewards = np.zeros((N, S, A))
    local_rows = [dict() for _ in range(N)]  # (i, nbhd, a) -> dense row over S_i
    for si, s in enumerate(states):
        per_agent = []
        for i in range(N):
            nb = mdp.nbhd_states(s, i)
            rows = []
            for a_i in range(mdp.action_sizes[i]):
                key = (nb, a_i)
                row = local_rows[i].get(key)
                if row is None:
                    outcomes, probs = mdp.transition(i, nb, a_i)
                    row = np.zeros(mdp.state_sizes[i])
                    for o, p in zip(outcomes, probs):
                        row[o] += p
                    local_rows[i][key] = row
                rows.append(row)
            per_agent.append(rows)
        for ai, a in enumerate(actions):
            vec = per_agent[0][a[0]]
            for i in range(1, N):
                vec = np.kron(vec, per_agent[i][a[i]])
            trans[si, ai] = vec
            rewards[:, si, ai] = mdp.rewards(s, a, None)

    init = np.zeros(S)
    init_states, init_probs = mdp.initial_states()
    for s, p in zip(init_states, init_probs):
        init[state_pos[tuple(s)]] += p

    return Tabular(mdp.graph, mdp.gamma, mdp.reward_bound,
                   list(mdp.state_sizes), list(mdp.action_sizes),
                   states, actions, trans, rewards, init, sidx, aidx)


def policy_matrix(tab: Tabular, policy: TabularPolicy) -> np.ndarray:
    """Joint action probabilities, (S, A)."""
    pm = np.ones((tab.n_states, tab.n_actions))
    for i in range(tab.n_agents):
        pm *= policy.probs(i)[tab.sidx[i][:, None], tab.aidx[i][None, :]]
    return pm


def solve_q(tab: Tabular, policy: TabularPolicy, tol: float = 1e-10,
            max_iter: int = 100_000) -> np.ndarray:
    """Per-agent on-policy Q tables (N, S, A) to sup-norm residual < tol."""
    pm = policy_matrix(tab, policy)
    q = np.zeros((tab.n_agents, tab.n_states, tab.n_actions))
    flat_trans = tab.trans.reshape(tab.n_states * tab.n_actions, tab.n_states)
    for _ in range(max_iter):
        v = (pm[None, :, :] * q).sum(axis=2)          # (N, S)
        nxt = tab.rewards + tab.gamma * (v @ flat_trans.T).reshape(q.shape)
        resid = np.max(np.abs(nxt - q))
        q = nxt
        if resid < tol:
            return q
    raise RuntimeError(f"Bellman iteration did not reach residual {tol}")


def global_q(q_per_agent: np.ndarray) -> np.ndarray:
    return q_per_agent.mean(axis=0)


def bellman_residual(tab: Tabular, policy: TabularPolicy, q: np.ndarray) -> float:
    pm = policy_matrix(tab, policy)
    v = (pm[None, :, :] * q).sum(axis=2)
    flat_trans = tab.trans.reshape(-1, tab.n_states)
    nxt = tab.rewards + tab.gamma * (v @ flat_trans.T).reshape(q.shape)
    return float(np.max(np.abs(nxt - q)))


def state_kernel(tab: Tabular, policy: TabularPolicy) -> np.ndarray:
    """On-policy state transition matrix (S, S)."""
    pm = policy_matrix(tab, policy)
    return np.einsum("sa,sat->st", pm, tab.trans)


def visitation(tab: Tabular, policy: TabularPolicy, tail: float = 1e-12) -> np.ndarray:
    """Discounted visitation (1-gamma) sum_t gamma^t Pr(s_t = s); sums to 1.

    The geometric series is truncated once gamma^t < tail, which leaves a
    mass defect below tail / (1 - gamma).
    """
    kern = state_kernel(tab, policy)
    p = tab.init.copy()
    d = np.zeros_like(p)
    w = 1.0
    while w >= tail:
        d += w * p
        p = p @ kern
        w *= tab.gamma
    return (1.0 - tab.gamma) * d


def objective(tab: Tabular, policy: TabularPolicy, q: np.ndarray | None = None) -> float:
    """J(theta): expected discounted mean-over-agents reward from the start dist."""
    if q is None:
        q = solve_q(tab, policy)
    pm = policy_matrix(tab, policy)
    v = (pm * global_q(q)).sum(axis=1)
    return float(tab.init @ v)


def _accumulate_blocks(tab: Tabular, policy: TabularPolicy, weights: np.ndarray) -> np.ndarray:
    """sum_{s,a} weights[s,a] * grad_theta log pi(a|s), flat over all agents.

    Uses the tabular-softmax structure: gathering weights onto local
    (state, action) cells and centering each row by its row sum times the
    row probabilities is exactly the score-function sum.
    """
    out = []
    for i in range(tab.n_agents):
        w_local = np.zeros((tab.state_sizes[i], tab.action_sizes[i]))
        np.add.at(w_local, (tab.sidx[i][:, None], tab.aidx[i][None, :]), weights)
        rows = w_local.sum(axis=1, keepdims=True)
        out.append((w_local - policy.probs(i) * rows).ravel())
    return np.concatenate(out)


def exact_gradient(tab: Tabular, policy: TabularPolicy,
                   q: np.ndarray | None = None) -> np.ndarray:
    """Exact gradient of J via visitation and the global Q, flat d_total."""
    if q is None:
        q = solve_q(tab, policy)
    d = visitation(tab, policy)
    pm = policy_matrix(tab, policy)
    weights = d[:, None] * pm * global_q(q)
    return _accumulate_blocks(tab, policy, weights) / (1.0 - tab.gamma)


# -- finite-horizon truncated quantities -------------------------------------


def _member_reward(tab: Tabular, agent: int, kappa: int) -> np.ndarray:
    members = tab.graph.khop(agent, kappa)
    return tab.rewards[list(members)].sum(axis=0) / tab.n_agents


def truncated_objective(tab: Tabular, policy: TabularPolicy, agent: int,
                        kappa: int, horizon: int) -> float:
    """E sum_{t<H} gamma^t (1/N) sum_{j in khop} r_j; the learner's target."""
    rbar = _member_reward(tab, agent, kappa)
    pm = policy_matrix(tab, policy)
    kern = np.einsum("sa,sat->st", pm, tab.trans)
    per_state = (pm * rbar).sum(axis=1)
    p = tab.init.copy()
    total = 0.0
    w = 1.0
    for _ in range(horizon):
        total += w * float(p @ per_state)
        p = p @ kern
        w *= tab.gamma
    return total


def truncated_gradient(tab: Tabular, policy: TabularPolicy, agent: int,
                       kappa: int, horizon: int) -> np.ndarray:
    """Exact gradient of the truncated objective, flat over all agents.

    Backward induction gives the finite-horizon reward-to-go tables
    Q_t(s, a); the score-function form then weights each (t, s, a) by
    gamma^t Pr(s_t = s) pi(a|s) Q_t(s, a).
    """
    rbar = _member_reward(tab, agent, kappa)
    pm = policy_matrix(tab, policy)
    kern = np.einsum("sa,sat->st", pm, tab.trans)
    flat_trans = tab.trans.reshape(-1, tab.n_states)

    qs = [rbar]
    for _ in range(horizon - 1):
        v = (pm * qs[-1]).sum(axis=1)
        qs.append(rbar + tab.gamma * (flat_trans @ v).reshape(rbar.shape))
    qs.reverse()  # qs[t] is the reward-to-go from step t

    weights = np.zeros_like(rbar)
    p = tab.init.copy()
    w = 1.0
    for t in range(horizon):
        weights += w * p[:, None] * pm * qs[t]
        p = p @ kern
        w *= tab.gamma
    return _accumulate_blocks(tab, policy, weights)


@dataclass
class Theorem1Result:
    lhs: float            # max over agents of the per-agent block error
    rhs: float
    margin: float         # rhs - lhs
    per_agent: list[float]
    score_bound: float


def theorem1_check(mdp: FactoredMdp | Tabular, policy: TabularPolicy,
                   kappa: int, horizon: int,
                   exact: np.ndarray | None = None) -> Theorem1Result:
    """Compare truncated and exact per-agent gradient blocks to the bound

    B * R * ((H+1) gamma^H + 2 gamma^(kappa+1)) / (1-gamma)^2.

    Passing a precomputed exact gradient skips the Bellman solve when the
    same (mdp, policy) pair is swept over many (kappa, horizon) points.
    """
    tab = mdp if isinstance(mdp, Tabular) else tabularize(mdp)
    if exact is None:
        exact = exact_gradient(tab, policy)
    per_agent = []
    for i in range(tab.n_agents):
        trunc = truncated_gradient(tab, policy, i, kappa, horizon)
        lo, hi = policy.offsets[i], policy.offsets[i + 1]
        per_agent.append(float(np.linalg.norm(trunc[lo:hi] - exact[lo:hi])))
    b = policy.max_score_norm()
    if not np.isfinite(b) or b <= 0.0:
        b = math.sqrt(2.0)
    g, h = tab.gamma, horizon
    rhs = b * tab.reward_bound * ((h + 1) * g ** h + 2.0 * g ** (kappa + 1)) / (1.0 - g) ** 2
    lhs = max(per_agent)
    return Theorem1Result(lhs, rhs, rhs - lhs, per_agent, b)


def smoothed_gradient_reference(tab: Tabular, policy: TabularPolicy, agent: int,
                                kappa: int, horizon: int, mu: float,
                                n_samples: int, rng: np.random.Generator):
    """Monte-Carlo estimate of the Gaussian-smoothed truncated gradient.

    Averages (J_hat(theta + mu v) - J_hat(theta)) / mu * v over standard
    normal v. Returns (mean, standard error) per coordinate, flat d_total.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples for a standard error")
    base = truncated_objective(tab, policy, agent, kappa, horizon)
    d = policy.dim_total
    acc = np.zeros(d)
    acc2 = np.zeros(d)
    for _ in range(n_samples):
        v = rng.standard_normal(d)
        shifted = truncated_objective(tab, policy.perturb(v, mu), agent, kappa, horizon)
        sample = ((shifted - base) / mu) * v
        acc += sample
        acc2 += sample * sample
    mean = acc / n_samples
    var = np.maximum(acc2 / n_samples - mean * mean, 0.0)
    se = np.sqrt(var / n_samples)
    return mean, se
