"""Divergence-based feature scoring and greedy selection."""

import numpy as np
import pytest

from mised.datasets import sample_normal
from mised.divergence import gaussian_parametric_kl, nn_kl
from mised.experiments import make_planted_features
from mised.features import forward_select, js_divergence, skipped_candidate_events


def gp(x1, x2):
    return gaussian_parametric_kl(x1, x2)


def test_label_swap_symmetry():
    x, y, _ = make_planted_features(200, 3, 1.5, 0)
    swapped = np.where(y == 1, 2, 1)
    assert js_divergence(x, y, nn_kl) == pytest.approx(
        js_divergence(x, swapped, nn_kl), rel=1e-12)


def test_row_permutation_invariance():
    x, y, _ = make_planted_features(200, 3, 1.5, 1)
    perm = np.random.default_rng(2).permutation(200)
    assert js_divergence(x[perm], y[perm], nn_kl) == pytest.approx(
        js_divergence(x, y, nn_kl), rel=1e-10)


def test_random_labels_score_near_zero():
    rng = np.random.default_rng(3)
    for seed in range(3):
        x = sample_normal(400, 2, 600 + seed)
        y = np.ones(400, dtype=int)
        y[rng.permutation(400)[:200]] = 2
        assert abs(js_divergence(x, y, nn_kl)) < 0.2


def test_score_grows_with_class_separation():
    vals = []
    for shift in (0.5, 1.0, 2.0, 4.0):
        x, y, _ = make_planted_features(400, 2, shift, 5)
        vals.append(js_divergence(x, y, gp))
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_label_validation():
    x = sample_normal(10, 2, 4)
    with pytest.raises(ValueError):
        js_divergence(x, np.ones(10), nn_kl)  # one class only
    y = np.ones(10)
    y[0] = 2.0
    with pytest.raises(ValueError):
        js_divergence(x, y, nn_kl)  # a class with one sample
    with pytest.raises(ValueError):
        js_divergence(x, np.ones(9), nn_kl)
    with pytest.raises(ValueError):
        js_divergence(x, np.arange(10) % 3, nn_kl)  # three classes


def test_forward_select_full_budget_is_a_permutation():
    x, y, _ = make_planted_features(150, 4, 1.0, 6)
    chosen = forward_select(x, y, 4, gp)
    assert sorted(chosen) == [0, 1, 2, 3]


def test_forward_select_budget_validation():
    x, y, _ = make_planted_features(50, 3, 1.0, 7)
    with pytest.raises(ValueError):
        forward_select(x, y, 0, gp)
    with pytest.raises(ValueError):
        forward_select(x, y, 4, gp)


def test_forward_select_finds_planted_feature():
    hits = 0
    for seed in range(10):
        x, y, informative = make_planted_features(400, 6, 2.0, seed)
        hits += forward_select(x, y, 1, nn_kl)[0] == informative
    assert hits >= 8


def test_failing_candidates_are_skipped_and_counted():
    x, y, informative = make_planted_features(200, 4, 2.0, 8)
    dead = (informative + 1) % 4

    def picky(x1, x2, x1_rows_in_x2=None):
        if x1.shape[1] == 1 and x1[0, 0] == x[0, dead]:
            raise ValueError("refusing this feature")
        return nn_kl(x1, x2, x1_rows_in_x2=x1_rows_in_x2)

    skipped_candidate_events.reset()
    chosen = forward_select(x, y, 1, picky)
    assert chosen[0] != dead
    assert skipped_candidate_events.count >= 1
    skipped_candidate_events.reset()


def test_every_candidate_failing_raises():
    x, y, _ = make_planted_features(100, 3, 1.0, 9)

    def broken(x1, x2, x1_rows_in_x2=None):
        raise ValueError("nope")

    skipped_candidate_events.reset()
    with pytest.raises(RuntimeError):
        forward_select(x, y, 1, broken)
    assert skipped_candidate_events.count == 3
    skipped_candidate_events.reset()
