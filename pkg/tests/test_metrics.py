"""Evaluation metrics: normalized MSE and ROC AUC."""

import numpy as np
import pytest

from mised.metrics import binary_auc, normalized_mse


def test_nmse_zero_on_exact_estimates():
    t = np.array([0.3, -1.2, 2.0])
    assert normalized_mse(t, t) == 0.0


def test_nmse_doubling_gives_half():
    # e = 2t: mean|e-t|^2 = mean|t|^2, denominator = 2 mean|t|^2
    t = np.array([1.0, -2.0, 0.5, 3.0])
    assert normalized_mse(2.0 * t, t) == pytest.approx(0.5, rel=1e-12)


def test_nmse_scale_invariance():
    rng = np.random.default_rng(0)
    e = rng.standard_normal(50)
    t = rng.standard_normal(50)
    base = normalized_mse(e, t)
    for c in (0.001, 7.0, 2500.0):
        assert normalized_mse(c * e, c * t) == pytest.approx(base, rel=1e-12)


def test_nmse_rejects_degenerate_input():
    t = np.ones(5)
    with pytest.raises(ValueError):
        normalized_mse(np.zeros(5), t)
    with pytest.raises(ValueError):
        normalized_mse(t, np.zeros(5))
    with pytest.raises(ValueError):
        normalized_mse(np.ones(4), np.ones(5))
    with pytest.raises(ValueError):
        normalized_mse(np.array([np.nan, 1.0]), np.ones(2))


def test_auc_perfect_and_reversed():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    labels = np.array([True, True, False, False])
    assert binary_auc(scores, labels) == 1.0
    assert binary_auc(-scores, labels) == 0.0


def test_auc_complement_symmetry():
    rng = np.random.default_rng(1)
    scores = rng.standard_normal(300)
    labels = rng.random(300) < 0.3
    assert abs(binary_auc(-scores, labels) - (1.0 - binary_auc(scores, labels))) \
        <= 1e-12


def test_auc_constant_scores_is_chance():
    labels = np.array([True, False, True, False])
    assert binary_auc(np.ones(4), labels) == pytest.approx(0.5, abs=1e-12)


def test_auc_uninformative_scores_near_half():
    rng = np.random.default_rng(2)
    scores = rng.standard_normal(4000)
    labels = rng.random(4000) < 0.5
    assert abs(binary_auc(scores, labels) - 0.5) < 0.05


def test_auc_needs_both_classes():
    with pytest.raises(ValueError):
        binary_auc(np.ones(3), np.array([True, True, True]))
    with pytest.raises(ValueError):
        binary_auc(np.ones(3), np.zeros(3, dtype=bool))
