"""Links, evaluator votes, trimming, and the safe inverse-link path."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zopref.preference import (
    bradley_terry,
    estimate_preference,
    invlink_of_mean,
    linear,
    make_link,
    preference_prob,
    query_evaluators,
    reward_diff_range,
    trim,
    trim_bounds,
    trim_level,
)
from zopref.seeding import stream


def test_equal_rewards_are_a_coin_flip():
    assert preference_prob(bradley_terry(), 1.3, 1.3) == 0.5
    assert preference_prob(linear(5.0), -2.0, -2.0) == 0.5


def test_logistic_known_value():
    assert bradley_terry().prob(math.log(3.0)) == pytest.approx(0.75, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-700, 700))
def test_link_symmetry(x):
    link = bradley_terry()
    assert link.prob(x) + link.prob(-x) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10))
def test_logistic_inverse_round_trip(x):
    # beyond |x| ~ 15 the probability is within float eps of {0, 1} and the
    # round trip is limited by representing 1 - p, not by the formulas
    link = bradley_terry()
    assert link.inverse(link.prob(x)) == pytest.approx(x, rel=1e-8, abs=1e-9)


def test_linear_link_shape_and_inverse():
    link = linear(4.0)
    assert link.prob(2.0) == pytest.approx(0.75)
    assert link.prob(10.0) == 1.0 and link.prob(-10.0) == 0.0
    assert link.inverse(0.75) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        linear(0.0)
    with pytest.raises(ValueError):
        make_link("nope")


def test_logistic_inverse_endpoints_diverge():
    link = bradley_terry()
    assert link.inverse(0.0) == -math.inf
    assert link.inverse(1.0) == math.inf
    assert link.inverse_lipschitz(0.0) == math.inf
    assert link.inverse_lipschitz(0.25) == pytest.approx(1.0 / (0.25 * 0.75))


def test_votes_all_ones_for_huge_difference():
    votes = query_evaluators(bradley_terry(), 1e6, 0.0, 50, stream(0, 1))
    assert votes.sum() == 50


def test_vote_mean_matches_logistic_probability():
    m = 100_000
    votes = query_evaluators(bradley_terry(), 1.0, 0.0, m, stream(0, 2))
    p = 1.0 / (1.0 + math.exp(-1.0))
    se = math.sqrt(p * (1 - p) / m)
    assert abs(votes.mean() - p) < 3 * se


def test_votes_deterministic_for_fixed_stream():
    a = query_evaluators(bradley_terry(), 0.3, 0.1, 1000, stream(7, 3))
    b = query_evaluators(bradley_terry(), 0.3, 0.1, 1000, stream(7, 3))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        query_evaluators(bradley_terry(), 0.0, 0.0, 0, stream(0, 0))


def test_trim_examples():
    assert trim(0.5, 0.1) == 0.5
    assert trim(0.99, 0.1) == pytest.approx(0.9)
    assert trim(0.03, 0.1) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        trim(0.5, 0.5)
    with pytest.raises(ValueError):
        trim(0.5, -0.01)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 0.499))
def test_trim_lands_in_band_and_is_idempotent(x, delta):
    t = trim(x, delta)
    assert delta <= t <= 1.0 - delta
    assert trim(t, delta) == t


def test_trim_level_known_value():
    delta = trim_level(bradley_terry(), reward_bound=1.0, gamma=0.5, horizon=1)
    assert delta == pytest.approx(0.11920292202211755, abs=1e-15)


def test_trim_level_branches_agree_for_logistic():
    link = bradley_terry()
    d = reward_diff_range(1.0, 0.9, 5)
    assert link.prob(-d) == pytest.approx(1.0 - link.prob(d), abs=1e-12)


def test_trim_level_long_horizon_matches_limit():
    link = bradley_terry()
    # gamma^H below float resolution: the level equals the H -> infinity value
    far = trim_level(link, 1.0, 0.5, 500)
    limit = link.prob(-2.0 * 1.0 / (1.0 - 0.5))
    assert far == pytest.approx(limit, rel=1e-12)


def test_linear_scale_must_exceed_reward_range():
    d = reward_diff_range(1.0, 0.5, 4)
    with pytest.raises(ValueError):
        trim_level(linear(d), 1.0, 0.5, 4)
    assert trim_level(linear(d * 1.5), 1.0, 0.5, 4) > 0.0


def test_estimate_preference_examples():
    assert estimate_preference(np.array([1, 0, 1, 0]), 0.1) == 0.5
    assert estimate_preference(np.ones(8), 0.1) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        estimate_preference(np.array([]), 0.1)


def test_invlink_of_mean_matches_naive_path_when_representable():
    link = bradley_terry()
    delta, lo, hi = trim_bounds(link, reward_bound=1.0, gamma=0.5, horizon=2)
    for mean in (0.2, 0.5, 0.77, delta / 2, 1.0 - delta / 2):
        naive = link.inverse(trim(mean, delta))
        assert invlink_of_mean(link, mean, lo, hi) == pytest.approx(naive, abs=1e-12)


def test_invlink_of_mean_survives_saturated_votes():
    # at GridWorld scale 1 - delta rounds to 1.0 in float64 and the naive
    # inverse of the trimmed mean would be infinite; the clamp form stays
    # exactly on the reachable reward-difference boundary
    link = bradley_terry()
    delta, lo, hi = trim_bounds(link, reward_bound=10.0, gamma=0.9, horizon=10)
    assert delta == 0.0  # underflow is the point of this scenario
    assert math.isfinite(invlink_of_mean(link, 1.0, lo, hi))
    assert invlink_of_mean(link, 1.0, lo, hi) == hi
    assert invlink_of_mean(link, 0.0, lo, hi) == lo
    assert hi == pytest.approx(reward_diff_range(10.0, 0.9, 10))


def test_reward_diff_range_arithmetic():
    assert reward_diff_range(1.0, 0.5, 1) == pytest.approx(2.0)
    assert reward_diff_range(2.0, 0.9, 3) == pytest.approx(2 * 2 * (1 - 0.9 ** 3) / 0.1)
