"""Zeroth-order policy learning from simulated preference feedback.

Each iteration draws one Gaussian direction per agent, runs K paired
rollouts (current policy, then the perturbed one), asks M simulated
evaluators to compare each pair restricted to the agent's neighborhood,
and steps along the perturbation scaled by the inverse link of the
trimmed vote share. No agent ever sees a reward, only comparisons.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .mdp import FactoredMdp
from .oracle import Tabular, exact_gradient, objective, solve_q, tabularize
from .policy import TabularPolicy
from .preference import Link, invlink_of_mean, make_link, preference_prob, trim_bounds
from .rollout import discount_weights, rollout_joint, trajectory_reward, truncate


@dataclass
class LearnerConfig:
    iterations: int = 200       # T
    trials: int = 100           # K rollout pairs per iteration
    evaluators: int = 200       # M votes per comparison
    horizon: int = 10           # H rollout length
    kappa: int = 1              # neighborhood radius for truncated rewards
    mu: float = 0.1             # perturbation scale
    alpha: float = 0.1          # step size
    link: str = "bradley_terry"
    link_scale: float = 1.0     # used by the linear link only
    oracle_feedback: bool = False       # replace votes by the exact reward difference
    common_random_numbers: bool = False  # share rollout streams within a pair
    grad_clip: float = 0.0      # 0 disables; not used by any shipped preset
    eval_rollouts: int = 100
    eval_tail: float = 1e-4     # evaluation horizon: smallest H with gamma^H < tail
    eval_cadence: int = 1
    eval_cap: int = 20_000      # exact evaluation when joint S*A is at most this

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.trials < 1 or self.evaluators < 1:
            raise ValueError("trials and evaluators must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.mu <= 0 or self.alpha <= 0:
            raise ValueError("mu and alpha must be positive")

    def make_link(self) -> Link:
        return make_link(self.link, self.link_scale)


@dataclass
class IterationRow:
    iteration: int
    ret: float
    grad_norm: float
    mean_abs_invlink: float
    elapsed_ms: float


@dataclass
class TrainResult:
    policy: TabularPolicy
    rows: list[IterationRow] = field(default_factory=list)


def sample_perturbation(dims, rngs) -> np.ndarray:
    """Concatenated per-agent standard normal blocks, one stream per agent."""
    return np.concatenate([rng.standard_normal(d) for d, rng in zip(dims, rngs)])


def run_trial(mdp: FactoredMdp, policy: TabularPolicy, perturbed: TabularPolicy,
              cfg: LearnerConfig, link: Link, bounds, rng_base, rng_pert,
              rng_votes) -> np.ndarray:
    """One paired comparison; returns per-agent inverse-link values.

    bounds is (delta, lo, hi) from preference.trim_bounds. In oracle mode
    the vote stage collapses to the exact reward difference clamped to the
    trim range (the inverse link of the trimmed exact preference
    probability, computed without the float round trip).
    """
    n = mdp.graph.n_agents
    base = rollout_joint(mdp, policy, cfg.horizon, rng_base)
    pert = rollout_joint(mdp, perturbed, cfg.horizon, rng_pert)
    _, lo, hi = bounds
    out = np.empty(n)
    for i in range(n):
        r0 = trajectory_reward(truncate(base, mdp.graph, i, cfg.kappa), mdp.gamma, n)
        r1 = trajectory_reward(truncate(pert, mdp.graph, i, cfg.kappa), mdp.gamma, n)
        if cfg.oracle_feedback:
            out[i] = min(max(r1 - r0, lo), hi)
        else:
            p = preference_prob(link, r1, r0)
            mean = float((rng_votes.random(cfg.evaluators) < p).mean())
            out[i] = invlink_of_mean(link, mean, lo, hi)
    return out


def assemble_gradient(trial_values: np.ndarray, v: np.ndarray, mu: float,
                      policy: TabularPolicy) -> np.ndarray:
    """g_i = (1 / (K mu)) sum_k c_{i,k} * v_i, assembled flat.

    trial_values is (K, N); v is the flat perturbation whose agent blocks
    were the ones actually applied.
    """
    k = trial_values.shape[0]
    coef = trial_values.sum(axis=0) / (k * mu)
    g = v.copy()
    for i, block in enumerate(policy.split(g)):
        block *= coef[i]
    return g


def update(policy: TabularPolicy, grad: np.ndarray, alpha: float) -> TabularPolicy:
    return policy.add(grad, alpha)


def evaluation_horizon(gamma: float, tail: float) -> int:
    return max(1, math.ceil(math.log(tail) / math.log(gamma)))


def mc_return(mdp: FactoredMdp, policy: TabularPolicy, n_rollouts: int,
              horizon: int, rng_for) -> float:
    """Monte-Carlo discounted mean-over-agents return from the start state."""
    w = discount_weights(mdp.gamma, horizon)
    total = 0.0
    for r in range(n_rollouts):
        traj = rollout_joint(mdp, policy, horizon, rng_for(r))
        total += float(w @ traj.rewards.mean(axis=1))
    return total / n_rollouts


class _Evaluator:
    """Exact objective when the joint space is small, Monte Carlo otherwise."""

    def __init__(self, mdp: FactoredMdp, cfg: LearnerConfig, seed: int):
        self.mdp = mdp
        self.cfg = cfg
        self.seed = seed
        self.tab: Tabular | None = None
        self.view = mdp.markov_view()
        if (self.view is not None
                and self.view.total_states * self.view.total_actions <= cfg.eval_cap):
            self.tab = tabularize(self.view)
        self.horizon = evaluation_horizon(mdp.gamma, cfg.eval_tail)

    @property
    def exact(self) -> bool:
        return self.tab is not None

    def __call__(self, policy: TabularPolicy, iteration: int) -> float:
        if self.tab is not None:
            return objective(self.tab, self.view.lift_policy(policy))
        return mc_return(
            self.mdp, policy, self.cfg.eval_rollouts, self.horizon,
            lambda r: seeding.stream(self.seed, seeding.EVAL, iteration, r),
        )


def train(mdp: FactoredMdp, cfg: LearnerConfig, seed: int,
          on_row=None, on_checkpoint=None, checkpoint_every: int = 0) -> TrainResult:
    """Run the full preference-feedback loop from a zero-logit policy.

    on_row(row) fires after each evaluated iteration; on_checkpoint
    (iteration, policy) per the interval and always for the final policy.
    """
    link = cfg.make_link()
    bounds = trim_bounds(link, mdp.reward_bound, mdp.gamma, cfg.horizon)
    policy = TabularPolicy.for_mdp(mdp)
    evaluator = _Evaluator(mdp, cfg, seed)
    n = mdp.graph.n_agents
    result = TrainResult(policy)

    for t in range(cfg.iterations):
        t0 = time.perf_counter()
        rngs = [seeding.stream(seed, seeding.PERTURB, t, i) for i in range(n)]
        v = sample_perturbation(policy.dims, rngs)
        perturbed = policy.perturb(v, cfg.mu)

        cvals = np.empty((cfg.trials, n))
        for k in range(cfg.trials):
            rng_base = seeding.stream(seed, seeding.ROLLOUT, t, k, 0)
            pert_idx = 0 if cfg.common_random_numbers else 1
            rng_pert = seeding.stream(seed, seeding.ROLLOUT, t, k, pert_idx)
            rng_votes = seeding.stream(seed, seeding.VOTES, t, k)
            cvals[k] = run_trial(mdp, policy, perturbed, cfg, link, bounds,
                                 rng_base, rng_pert, rng_votes)

        g = assemble_gradient(cvals, v, cfg.mu, policy)
        grad_norm = float(np.linalg.norm(g))
        if cfg.grad_clip > 0.0 and grad_norm > cfg.grad_clip:
            g = g * (cfg.grad_clip / grad_norm)
        policy = update(policy, g, cfg.alpha)

        if checkpoint_every and on_checkpoint and (t + 1) % checkpoint_every == 0:
            on_checkpoint(t, policy)

        if (t % cfg.eval_cadence) == 0 or t == cfg.iterations - 1:
            ret = evaluator(policy, t)
            row = IterationRow(
                iteration=t,
                ret=ret,
                grad_norm=grad_norm,
                mean_abs_invlink=float(np.abs(cvals).mean()),
                elapsed_ms=round((time.perf_counter() - t0) * 1000.0, 3),
            )
            result.rows.append(row)
            if on_row:
                on_row(row)

    result.policy = policy
    if on_checkpoint and cfg.iterations > 0:
        on_checkpoint(cfg.iterations - 1, policy)
    return result


# -- reference ascent on true gradients ---------------------------------------


def baseline_gradient_ascent(mdp: FactoredMdp, iterations: int, alpha: float,
                             seed: int, batch: int = 512, eval_every: int = 0,
                             eval_rollouts: int = 100, eval_cap: int = 20_000):
    """Gradient ascent on the true objective at the same step size.

    Uses the exact oracle gradient when the joint space is enumerable.
    Otherwise estimates the analytic score-function gradient from `batch`
    truthful-reward rollouts per iteration (reward-to-go weights with a
    batch-mean control variate), at a horizon long enough that the
    finite-horizon bias is negligible next to the reward scale.

    Returns (policy, curve) where curve lists (iteration, return) pairs,
    always including the final iteration.
    """
    view = mdp.markov_view()
    tab = None
    if view is not None and view.total_states * view.total_actions <= eval_cap:
        tab = tabularize(view)
    policy = TabularPolicy.for_mdp(mdp)
    horizon = evaluation_horizon(mdp.gamma, 1e-3)
    n = mdp.graph.n_agents
    curve: list[tuple[int, float]] = []

    def measure(t, pol):
        if tab is not None:
            return objective(tab, view.lift_policy(pol))
        return mc_return(mdp, pol, eval_rollouts, evaluation_horizon(mdp.gamma, 1e-4),
                         lambda r: seeding.stream(seed, seeding.BASELINE, 1_000_000 + t, r))

    for t in range(iterations):
        if tab is not None and view is mdp:
            # the exact gradient lives in the view's parameter space, so it
            # is only a drop-in ascent direction when the view is the MDP
            # itself; augmented views fall back to the sampled estimate
            g = exact_gradient(tab, policy)
        else:
            g = _sampled_gradient(mdp, policy, batch, horizon,
                                  seeding.stream(seed, seeding.BASELINE, t))
        policy = policy.add(g, alpha)
        if eval_every and (t + 1) % eval_every == 0 and t != iterations - 1:
            curve.append((t, measure(t, policy)))
    curve.append((iterations - 1, measure(iterations - 1, policy)))
    return policy, curve


def _sampled_gradient(mdp: FactoredMdp, policy: TabularPolicy, batch: int,
                      horizon: int, rng) -> np.ndarray:
    """Unbiased finite-horizon gradient: sum_t gamma^t score_t (G_t - b_t)."""
    n = mdp.graph.n_agents
    states = np.empty((batch, horizon, n), dtype=np.int64)
    actions = np.empty((batch, horizon, n), dtype=np.int64)
    togo = np.empty((batch, horizon))
    for b in range(batch):
        traj = rollout_joint(mdp, policy, horizon, rng)
        states[b] = traj.states
        actions[b] = traj.actions
        mean_r = traj.rewards.mean(axis=1)
        acc = 0.0
        for h in range(horizon - 1, -1, -1):  # G_t = r_t + gamma G_{t+1}
            acc = mean_r[h] + mdp.gamma * acc
            togo[b, h] = acc
    togo -= togo.mean(axis=0, keepdims=True)  # control variate per step
    w = (discount_weights(mdp.gamma, horizon)[None, :] * togo).ravel()

    blocks = []
    for i in range(n):
        tbl = np.zeros((mdp.state_sizes[i], policy.logits[i].shape[1]))
        np.add.at(tbl, (states[:, :, i].ravel(), actions[:, :, i].ravel()), w)
        rows = tbl.sum(axis=1, keepdims=True)
        blocks.append((tbl - policy.probs(i) * rows).ravel())
    return np.concatenate(blocks) / batch


# -- step sizes from the convergence analysis ---------------------------------


def suggested_alpha(smoothness: float, n_agents: int, dim_total: int) -> float:
    """Step size 1 / (12 L N d (d + 2)) for a user-supplied smoothness L."""
    if smoothness <= 0:
        raise ValueError("smoothness constant must be positive")
    return 1.0 / (12.0 * smoothness * n_agents * dim_total * (dim_total + 2))


def suggested_mu(link: Link, reward_bound: float, gamma: float, horizon: int,
                 trials: int, n_agents: int, dim_total: int, evaluators: int,
                 smoothness: float) -> float:
    """Perturbation scale balancing smoothing bias against estimation noise.

    mu^2 = max{ R / ((1-gamma) L sqrt(K N d)),
                (3 L_sigma / L) sqrt(log M / M) }
    with L_sigma the inverse-link Lipschitz constant on the trimmed range.
    L is the caller's smoothness constant; estimating it is the caller's
    responsibility and any empirical value should be labelled as such.
    """
    if smoothness <= 0:
        raise ValueError("smoothness constant must be positive")
    from .preference import trim_level

    delta = trim_level(link, reward_bound, gamma, horizon)
    l_sigma = link.inverse_lipschitz(delta)
    a = reward_bound / ((1.0 - gamma) * smoothness * math.sqrt(trials * n_agents * dim_total))
    b = (3.0 * l_sigma / smoothness) * math.sqrt(math.log(evaluators) / evaluators)
    return math.sqrt(max(a, b))
