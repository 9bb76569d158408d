"""Preference links, simulated evaluators, and trimmed estimation.

A link sigma maps a trajectory-reward difference to the probability that
the second trajectory is preferred. Evaluators vote independently with
that probability; the empirical vote mean is trimmed away from {0, 1} so
the inverse link stays bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Link:
    kind: str  # "bradley_terry" or "linear"
    scale: float = 1.0

    def prob(self, x: float) -> float:
        """sigma(x): preference probability for reward difference x."""
        if self.kind == "bradley_terry":
            # evaluate on the safe side of exp to avoid overflow
            if x >= 0:
                return 1.0 / (1.0 + math.exp(-x))
            e = math.exp(x)
            return e / (1.0 + e)
        half = 0.5 + x / (2.0 * self.scale)
        return min(1.0, max(0.0, half))

    def inverse(self, p: float) -> float:
        """sigma^{-1}(p); +-inf at the endpoints of the Bradley-Terry link."""
        if self.kind == "bradley_terry":
            if p <= 0.0:
                return -math.inf
            if p >= 1.0:
                return math.inf
            return math.log(p) - math.log1p(-p)
        return (2.0 * p - 1.0) * self.scale

    def inverse_lipschitz(self, delta: float) -> float:
        """Lipschitz constant of sigma^{-1} on [delta, 1-delta]."""
        if self.kind == "bradley_terry":
            if delta <= 0.0:
                return math.inf
            return 1.0 / (delta * (1.0 - delta))
        return 2.0 * self.scale


def bradley_terry() -> Link:
    return Link("bradley_terry")


def linear(scale: float) -> Link:
    if scale <= 0:
        raise ValueError(f"linear link scale must be positive, got {scale}")
    return Link("linear", float(scale))


def make_link(kind: str, scale: float = 1.0) -> Link:
    if kind == "bradley_terry":
        return bradley_terry()
    if kind == "linear":
        return linear(scale)
    raise ValueError(f"unknown link kind {kind!r}")


def preference_prob(link: Link, r1: float, r0: float) -> float:
    """Probability an evaluator prefers the trajectory with reward r1."""
    return link.prob(r1 - r0)


def query_evaluators(link: Link, r1: float, r0: float, m: int,
                     rng: np.random.Generator) -> np.ndarray:
    """m independent 0/1 preference votes."""
    if m < 1:
        raise ValueError(f"need at least one evaluator, got {m}")
    p = preference_prob(link, r1, r0)
    return (rng.random(m) < p).astype(np.int8)


def trim(x: float, delta: float) -> float:
    """Clamp x into [delta, 1-delta]."""
    if not 0.0 <= delta < 0.5:
        raise ValueError(f"trim level must lie in [0, 0.5), got {delta}")
    return min(max(x, delta), 1.0 - delta)


def reward_diff_range(reward_bound: float, gamma: float, horizon: int) -> float:
    """Largest possible |r1 - r0| over horizon-length discounted trajectories."""
    return 2.0 * reward_bound * (1.0 - gamma ** horizon) / (1.0 - gamma)


def trim_level(link: Link, reward_bound: float, gamma: float, horizon: int) -> float:
    """Trim level matched to the reachable reward-difference range."""
    d = reward_diff_range(reward_bound, gamma, horizon)
    if link.kind == "linear" and link.scale <= d:
        raise ValueError(
            f"linear link scale {link.scale} must exceed the reward-difference range {d}"
        )
    delta = min(link.prob(-d), 1.0 - link.prob(d))
    return delta


def trim_bounds(link: Link, reward_bound: float, gamma: float, horizon: int):
    """(delta, lo, hi) with lo/hi the inverse link at the trim boundaries.

    Both shipped links satisfy inverse(sigma(-d)) == -d exactly, so the
    boundaries are returned analytically; for bounds wide enough that
    1-delta rounds to 1.0 in float64 the naive inverse would be inf.
    """
    d = reward_diff_range(reward_bound, gamma, horizon)
    delta = trim_level(link, reward_bound, gamma, horizon)
    return delta, -d, d


def estimate_preference(votes: np.ndarray, delta: float) -> float:
    """Trimmed empirical preference probability."""
    votes = np.asarray(votes)
    if votes.size == 0:
        raise ValueError("cannot estimate a preference from zero votes")
    return trim(float(votes.mean()), delta)


def invlink_of_mean(link: Link, mean: float, lo: float, hi: float) -> float:
    """inverse(trim(mean)) computed as a clamp in inverse-link space.

    Identical to link.inverse(trim(mean, delta)) for the matching bounds,
    but immune to 1-delta rounding to 1.0.
    """
    if mean <= 0.0:
        return lo
    if mean >= 1.0:
        return hi
    return min(max(link.inverse(mean), lo), hi)
