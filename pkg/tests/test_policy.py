"""Tabular softmax policies: probabilities, scores, parameter ops, files."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zopref.policy import TabularPolicy, softmax_rows


def test_zero_logits_are_uniform():
    p = TabularPolicy.zeros([1], [5])
    assert np.allclose(p.probs(0), 0.2, atol=1e-15)


def test_softmax_known_value():
    p = TabularPolicy([np.array([[1.0, 0.0]])])
    row = p.probs(0)[0]
    assert row[0] == pytest.approx(0.7310585786300049, abs=1e-15)
    assert row[1] == pytest.approx(1.0 - 0.7310585786300049, abs=1e-15)


def test_rows_sum_to_one_large_table():
    rng = np.random.default_rng(0)
    p = TabularPolicy([rng.normal(0, 3, size=(25, 5))])
    sums = p.probs(0).sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) < 1e-12
    assert np.all(p.probs(0) > 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=2, max_size=6),
       st.floats(-30, 30))
def test_softmax_shift_invariance(row, c):
    base = softmax_rows(np.array([row]))
    shifted = softmax_rows(np.array([row]) + c)
    assert np.max(np.abs(base - shifted)) < 1e-12


def test_score_zero_mean():
    rng = np.random.default_rng(1)
    p = TabularPolicy([rng.normal(0, 2, size=(4, 3))])
    for s in range(4):
        mean = sum(p.probs(0)[s, a] * p.score(0, s, a) for a in range(3))
        assert np.max(np.abs(mean)) < 1e-12


def test_score_uniform_two_actions():
    p = TabularPolicy.zeros([1], [2])
    assert np.allclose(p.score(0, 0, 0), [0.5, -0.5], atol=1e-15)


def test_score_matches_finite_differences():
    rng = np.random.default_rng(2)
    p = TabularPolicy([rng.normal(0, 1, size=(3, 4))])
    h = 1e-6
    for s in range(3):
        for a in range(4):
            g = p.score(0, s, a)
            for j in range(p.dim_total):
                e = np.zeros(p.dim_total)
                e[j] = 1.0
                lo = math.log(p.add(e, -h).probs(0)[s, a])
                hi = math.log(p.add(e, +h).probs(0)[s, a])
                fd = (hi - lo) / (2 * h)
                denom = max(abs(fd), 1e-9)
                assert abs(g[j] - fd) / denom <= 1e-6


def test_score_norm_bounded_by_sqrt2():
    rng = np.random.default_rng(3)
    p = TabularPolicy([rng.normal(0, 4, size=(25, 5))])
    worst = 0.0
    for s in range(25):
        for a in range(5):
            worst = max(worst, float(np.linalg.norm(p.score(0, s, a))))
    assert worst <= math.sqrt(2.0) + 1e-12
    assert p.max_score_norm() <= math.sqrt(2.0) + 1e-12
    assert p.max_score_norm() >= worst - 1e-12


def test_near_deterministic_row_always_sampled():
    p = TabularPolicy([np.array([[50.0, 0.0, 0.0]])])
    rng = np.random.default_rng(4)
    assert all(p.sample_joint_action((0,), rng) == (0,) for _ in range(200))


def test_joint_log_prob_is_sum_of_locals():
    rng = np.random.default_rng(5)
    p = TabularPolicy([rng.normal(size=(2, 3)), rng.normal(size=(2, 2))])
    state, action = (1, 0), (2, 1)
    joint = p.probs(0)[1, 2] * p.probs(1)[0, 1]
    local_sum = math.log(p.probs(0)[1, 2]) + math.log(p.probs(1)[0, 1])
    assert math.log(joint) == pytest.approx(local_sum, abs=1e-12)


def test_perturb_zero_direction_is_identity():
    p = TabularPolicy.zeros([2], [2])
    q = p.perturb(np.zeros(p.dim_total), 0.1)
    assert all(np.array_equal(a, b) for a, b in zip(p.logits, q.logits))


def test_perturb_unit_direction_moves_one_entry():
    p = TabularPolicy.zeros([2], [2])
    v = np.zeros(4)
    v[2] = 1.0
    q = p.perturb(v, 0.1)
    assert q.logits[0][1, 0] == pytest.approx(0.1, abs=1e-15)
    assert np.count_nonzero(q.logits[0]) == 1


def test_perturb_round_trip_restores():
    rng = np.random.default_rng(6)
    p = TabularPolicy([rng.normal(size=(3, 2))])
    v = rng.normal(size=p.dim_total)
    q = p.perturb(v, 0.2).perturb(-v, 0.2)
    assert np.max(np.abs(q.logits[0] - p.logits[0])) < 1e-15


def test_split_layout_and_validation():
    p = TabularPolicy([np.zeros((2, 3)), np.zeros((1, 4))])
    assert p.dims == [6, 4]
    assert p.dim_total == 10
    flat = np.arange(10.0)
    blocks = p.split(flat)
    assert np.array_equal(blocks[0], np.arange(6.0))
    assert np.array_equal(blocks[1], np.arange(6.0, 10.0))
    with pytest.raises(ValueError):
        p.split(np.zeros(9))
    with pytest.raises(ValueError):
        TabularPolicy([np.zeros(3)])


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    p = TabularPolicy([rng.normal(size=(2, 3)), rng.normal(size=(4, 2))])
    path = tmp_path / "policy.json"
    p.save(path)
    q = TabularPolicy.load(path)
    assert len(q.logits) == 2
    for a, b in zip(p.logits, q.logits):
        assert np.array_equal(a, b)


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "something-else", "agents": []}')
    with pytest.raises(ValueError):
        TabularPolicy.load(path)
