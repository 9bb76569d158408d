"""Numerical validation suites for the oracle bounds and the estimator.

Three suites, each returning one row per check:

  bounds      truncation-error bound margins on a randomized MDP grid
  preference  inverse-link estimation error shrinking with the vote count
  estimator   smoothed-gradient identity plus bias/variance trends

The suites are deterministic for a fixed seed and are the same code paths
the acceptance tests assert on, so a green report here is the real gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .learner import LearnerConfig, run_trial, sample_perturbation
from .oracle import (
    Tabular,
    exact_gradient,
    smoothed_gradient_reference,
    tabularize,
    theorem1_check,
    truncated_gradient,
)
from .policy import TabularPolicy
from .preference import (
    bradley_terry,
    invlink_of_mean,
    preference_prob,
    trim,
    trim_bounds,
    trim_level,
)
from .rollout import rollout_joint, trajectory_reward, truncate
from .zoo import random_mdp, random_policy, three_agent_chain

SUITES = ("bounds", "estimator", "preference")


@dataclass(frozen=True)
class CheckRow:
    suite: str
    name: str
    lhs: float
    rhs: float
    tolerance: float
    relation: str  # "<=", "<", ">" between lhs and rhs
    passed: bool


def _row(suite: str, name: str, lhs: float, rhs: float, relation: str = "<=",
         tolerance: float = 0.0) -> CheckRow:
    lhs = float(lhs)
    rhs = float(rhs)
    if relation == "<=":
        ok = lhs <= rhs + tolerance
    elif relation == "<":
        ok = lhs < rhs + tolerance
    elif relation == ">":
        ok = lhs > rhs - tolerance
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return CheckRow(suite, name, lhs, rhs, tolerance, relation, ok)


# -- bounds suite --------------------------------------------------------------


def bounds_suite(seed: int = 0, n_mdps: int = 20, gammas=(0.5, 0.9),
                 kappas=(0, 1, 2), horizons=(1, 2, 4, 8)) -> list[CheckRow]:
    """Margins of the truncation-error bound over a randomized grid.

    One row per (mdp, gamma, kappa, horizon) checks lhs <= rhs. A final
    row checks that widening the truncation (kappa=2, H=8) shrinks the
    mean error to under 10% of the tightest truncation (kappa=0, H=1)
    at gamma=0.5, i.e. the bound tracks an actually-decaying quantity.
    """
    rows = []
    lhs_tight = []
    lhs_wide = []
    for m in range(n_mdps):
        shape_rng = seeding.stream(seed, seeding.DIAG, 0, m)
        n_agents = int(shape_rng.integers(2, 5))
        sizes = tuple(int(s) for s in shape_rng.integers(2, 4, size=n_agents))
        act_sizes = tuple(int(a) for a in shape_rng.integers(2, 4, size=n_agents))
        policy_rng = seeding.stream(seed, seeding.DIAG, 1, m)
        for gamma in gammas:
            table_rng = seeding.stream(seed, seeding.DIAG, 2, m)
            mdp = random_mdp(table_rng, n_agents, sizes, act_sizes, gamma=gamma)
            tab = tabularize(mdp)
            policy = random_policy(mdp, policy_rng, scale=0.5)
            exact = exact_gradient(tab, policy)
            for kappa in kappas:
                for horizon in horizons:
                    res = theorem1_check(tab, policy, kappa, horizon, exact)
                    rows.append(_row(
                        "bounds",
                        f"margin/mdp{m}/g{gamma}/k{kappa}/H{horizon}",
                        res.lhs, res.rhs,
                    ))
                    if gamma == 0.5 and kappa == 0 and horizon == 1:
                        lhs_tight.append(res.lhs)
                    if gamma == 0.5 and kappa == 2 and horizon == 8:
                        lhs_wide.append(res.lhs)
    rows.append(_row("bounds", "truncation-decay/k2H8-vs-k0H1",
                     np.mean(lhs_wide), 0.1 * np.mean(lhs_tight), "<"))
    return rows


# -- preference suite ----------------------------------------------------------


def preference_suite(seed: int = 0, reps: int = 200,
                     evaluator_counts=(10, 100, 1000, 10_000)) -> list[CheckRow]:
    """Median inverse-link estimation error versus the evaluator count.

    Reward differences are drawn once (uniform on [-3, 3]) and shared
    across evaluator counts, so the sweep is paired. Checks the median
    error is non-increasing in M and that M=10000 lands under a quarter
    of the M=100 error.
    """
    link = bradley_terry()
    delta = trim_level(link, reward_bound=1.0, gamma=0.9, horizon=10)
    rng = seeding.stream(seed, seeding.DIAG, 3)
    diffs = rng.uniform(-3.0, 3.0, size=reps)
    probs = np.array([link.prob(d) for d in diffs])

    medians = {}
    for m in evaluator_counts:
        votes_rng = seeding.stream(seed, seeding.DIAG, 4, m)
        hits = votes_rng.binomial(m, probs)
        errs = np.empty(reps)
        for r in range(reps):
            p_hat = trim(hits[r] / m, delta)
            errs[r] = abs(link.inverse(p_hat) - diffs[r])
        medians[m] = float(np.median(errs))

    rows = []
    for lo, hi in zip(evaluator_counts, evaluator_counts[1:]):
        rows.append(_row("preference", f"median-error/M{hi}-vs-M{lo}",
                         medians[hi], medians[lo]))
    if 100 in medians and 10_000 in medians:
        rows.append(_row("preference", "median-error/M10000-quarter-of-M100",
                         medians[10_000], 0.25 * medians[100], "<"))
    return rows


# -- estimator suite -----------------------------------------------------------

_MU_IDENTITY = 0.05
_KAPPA = 1
_HORIZON = 8


def _diag_setup(seed: int):
    mdp = three_agent_chain()
    tab = tabularize(mdp)
    policy = random_policy(mdp, seeding.stream(seed, seeding.DIAG, 5), scale=0.3)
    return mdp, tab, policy


def _stacked_truncated(tab: Tabular, policy: TabularPolicy) -> np.ndarray:
    """Each agent's own block of its own truncated-objective gradient."""
    out = np.empty(policy.dim_total)
    for i in range(tab.n_agents):
        lo, hi = policy.offsets[i], policy.offsets[i + 1]
        out[lo:hi] = truncated_gradient(tab, policy, i, _KAPPA, _HORIZON)[lo:hi]
    return out


def _stacked_exact(tab: Tabular, policy: TabularPolicy) -> np.ndarray:
    return exact_gradient(tab, policy)


def _mean_estimate(mdp, policy, cfg: LearnerConfig, bounds, seed: int,
                   tag: int, n_directions: int, paired: bool = False):
    """Mean and standard error of the per-agent estimator over directions.

    Each direction draws a fresh perturbation and one paired rollout.
    With paired=True the two rollouts of a pair share a stream, which
    leaves every conditional mean E[c | v] untouched (it is a difference
    of expectations) while cancelling most of the trajectory noise.
    Returns (mean, se) over the stacked per-agent blocks.
    """
    link = cfg.make_link()
    n = mdp.graph.n_agents
    acc = np.zeros(policy.dim_total)
    acc2 = np.zeros(policy.dim_total)
    for s in range(n_directions):
        rngs = [seeding.stream(seed, seeding.DIAG, tag, s, i) for i in range(n)]
        v = sample_perturbation(policy.dims, rngs)
        perturbed = policy.perturb(v, cfg.mu)
        pert_leg = 0 if paired else 1
        cvals = run_trial(
            mdp, policy, perturbed, cfg, link, bounds,
            seeding.stream(seed, seeding.DIAG, tag, s, 100, 0),
            seeding.stream(seed, seeding.DIAG, tag, s, 100, pert_leg),
            seeding.stream(seed, seeding.DIAG, tag, s, 200),
        )
        sample = v.copy()
        coef = cvals / cfg.mu
        for i, block in enumerate(policy.split(sample)):
            block *= coef[i]
        acc += sample
        acc2 += sample * sample
    mean = acc / n_directions
    var = np.maximum(acc2 / n_directions - mean * mean, 0.0)
    return mean, np.sqrt(var / n_directions)


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    cos = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))


def estimator_suite(seed: int = 0, identity_samples: int = 10_000,
                    trend_reps: int = 50) -> list[CheckRow]:
    """Smoothed-gradient identity and the estimator's bias/variance trends.

    Identity: the reward-difference (oracle feedback) estimator averaged
    over many directions must agree coordinate-wise with a Monte-Carlo
    estimate of the Gaussian-smoothed truncated gradient, and align with
    the exact truncated gradient. Trends: more evaluators shrink the bias
    angle to the exact gradient; more trials shrink the single-iteration
    variance; smaller perturbations inflate it.
    """
    mdp, tab, policy = _diag_setup(seed)
    bounds = trim_bounds(bradley_terry(), mdp.reward_bound, mdp.gamma, _HORIZON)
    rows = []

    # identity versus the smoothed reference
    oracle_cfg = LearnerConfig(iterations=1, trials=1, evaluators=1,
                               horizon=_HORIZON, kappa=_KAPPA, mu=_MU_IDENTITY,
                               alpha=0.1, oracle_feedback=True)
    est_mean, est_se = _mean_estimate(mdp, policy, oracle_cfg, bounds, seed,
                                      tag=6, n_directions=identity_samples,
                                      paired=True)
    ref = np.empty(policy.dim_total)
    ref_se = np.empty(policy.dim_total)
    for i in range(tab.n_agents):
        mean_i, se_i = smoothed_gradient_reference(
            tab, policy, i, _KAPPA, _HORIZON, _MU_IDENTITY,
            identity_samples, seeding.stream(seed, seeding.DIAG, 7, i))
        lo, hi = policy.offsets[i], policy.offsets[i + 1]
        ref[lo:hi] = mean_i[lo:hi]
        ref_se[lo:hi] = se_i[lo:hi]
    z = np.abs(est_mean - ref) / np.sqrt(est_se ** 2 + ref_se ** 2)
    rows.append(_row("estimator", "identity/max-z-score", np.max(z), 3.0))

    g_trunc = _stacked_truncated(tab, policy)
    cos = float(est_mean @ g_trunc
                / (np.linalg.norm(est_mean) * np.linalg.norm(g_trunc)))
    rows.append(_row("estimator", "identity/cosine-vs-truncated", cos, 0.8, ">"))

    # bias angle shrinks as evaluators increase. The three evaluator
    # counts are measured on the same directions, the same rollout pairs
    # and nested vote draws (the M=100 votes are the first 100 of the
    # M=1000 draws), and the two legs of each pair share a stream, so the
    # comparison isolates the vote-count effect: with independent draws
    # per arm the trajectory noise floor buries the M=100 / M=1000 gap.
    g_exact = _stacked_exact(tab, policy)
    counts = (10, 100, 1000)
    link = bradley_terry()
    mu_bias = 0.1
    n_directions = 100
    angles = {m: np.empty(trend_reps) for m in counts}
    n = mdp.graph.n_agents
    for rep in range(trend_reps):
        means = {m: np.zeros(policy.dim_total) for m in counts}
        for s in range(n_directions):
            rngs = [seeding.stream(seed, seeding.DIAG, 8, rep, s, i)
                    for i in range(n)]
            v = sample_perturbation(policy.dims, rngs)
            perturbed = policy.perturb(v, mu_bias)
            base = rollout_joint(mdp, policy, _HORIZON,
                                 seeding.stream(seed, seeding.DIAG, 9, rep, s, 0))
            pert = rollout_joint(mdp, perturbed, _HORIZON,
                                 seeding.stream(seed, seeding.DIAG, 9, rep, s, 0))
            u = seeding.stream(seed, seeding.DIAG, 10, rep, s).random(max(counts))
            for i in range(n):
                r0 = trajectory_reward(truncate(base, mdp.graph, i, _KAPPA),
                                       mdp.gamma, n)
                r1 = trajectory_reward(truncate(pert, mdp.graph, i, _KAPPA),
                                       mdp.gamma, n)
                p = preference_prob(link, r1, r0)
                lo, hi = policy.offsets[i], policy.offsets[i + 1]
                for m in counts:
                    c = invlink_of_mean(link, float((u[:m] < p).mean()),
                                        bounds[1], bounds[2])
                    means[m][lo:hi] += (c / mu_bias) * v[lo:hi]
        for m in counts:
            angles[m][rep] = _angle(means[m] / n_directions, g_exact)
    angle_medians = {m: float(np.median(angles[m])) for m in counts}
    rows.append(_row("estimator", "bias-angle/M100-vs-M10",
                     angle_medians[100], angle_medians[10], "<"))
    rows.append(_row("estimator", "bias-angle/M1000-vs-M100",
                     angle_medians[1000], angle_medians[100], "<"))

    # single-iteration variance: down in trials, up as mu shrinks
    def iteration_variance(trials: int, mu: float, tag: int) -> float:
        cfg = LearnerConfig(iterations=1, trials=trials, evaluators=100,
                            horizon=_HORIZON, kappa=_KAPPA, mu=mu, alpha=0.1)
        link = cfg.make_link()
        n = mdp.graph.n_agents
        samples = np.empty((trend_reps, policy.dim_total))
        for rep in range(trend_reps):
            rngs = [seeding.stream(seed, seeding.DIAG, tag, rep, i)
                    for i in range(n)]
            v = sample_perturbation(policy.dims, rngs)
            perturbed = policy.perturb(v, mu)
            cvals = np.empty((trials, n))
            for k in range(trials):
                cvals[k] = run_trial(
                    mdp, policy, perturbed, cfg, link, bounds,
                    seeding.stream(seed, seeding.DIAG, tag, rep, 100 + k, 0),
                    seeding.stream(seed, seeding.DIAG, tag, rep, 100 + k, 1),
                    seeding.stream(seed, seeding.DIAG, tag, rep, 200 + k),
                )
            g = v.copy()
            coef = cvals.mean(axis=0) / mu
            for i, block in enumerate(np.split(g, policy.offsets[1:-1])):
                block *= coef[i]
            samples[rep] = g
        centered = samples - samples.mean(axis=0, keepdims=True)
        return float((centered ** 2).sum(axis=1).sum() / (trend_reps - 1))

    var_k = {k: iteration_variance(k, 0.1, 20_000 + k) for k in (10, 100, 1000)}
    rows.append(_row("estimator", "variance/K100-vs-K10",
                     var_k[100], var_k[10], "<"))
    rows.append(_row("estimator", "variance/K1000-vs-K100",
                     var_k[1000], var_k[100], "<"))

    var_mu = {mu: iteration_variance(100, mu, 30_000 + int(mu * 1000))
              for mu in (0.3, 0.03)}
    rows.append(_row("estimator", "variance/mu0.03-vs-mu0.3",
                     var_mu[0.03], var_mu[0.3], ">"))
    return rows


def run_suite(name: str, seed: int = 0) -> list[CheckRow]:
    if name == "bounds":
        return bounds_suite(seed)
    if name == "preference":
        return preference_suite(seed)
    if name == "estimator":
        return estimator_suite(seed)
    if name == "all":
        rows = []
        for suite in SUITES:
            rows.extend(run_suite(suite, seed))
        return rows
    raise ValueError(f"unknown suite {name!r}; expected one of "
                     f"{', '.join(SUITES)} or all")
