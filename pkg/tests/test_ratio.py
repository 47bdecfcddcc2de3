"""Least-squares density-ratio estimator."""

import numpy as np
import pytest

from mised.datasets import sample_normal
from mised.derivatives import CvGrid
from mised.ratio import RatioModel, fit_ulsif, predict_ratio

GRID = CvGrid(sigmas=(0.5, 1.0, 2.0), ridges=(0.1, 1.0))


def test_identical_distributions_give_unit_ratio():
    medians = []
    for seed in range(5):
        x = sample_normal(700, 2, 100 + seed)
        den, num, held = x[:300], x[300:600], x[600:]
        model = fit_ulsif(den, num, CvGrid(seed=seed))
        w = predict_ratio(model, held)
        medians.append(float(np.mean(w)))
    assert all(0.8 < m < 1.2 for m in medians)


def test_ratio_tracks_a_mean_shift():
    rng = np.random.default_rng(0)
    den = rng.standard_normal((400, 1))
    num = rng.standard_normal((400, 1)) + 2.0
    model = fit_ulsif(den, num, GRID)
    hi = predict_ratio(model, np.array([[2.0]]))[0]
    lo = predict_ratio(model, np.array([[-2.0]]))[0]
    assert hi > 5.0 * max(lo, 1e-3)


def test_center_cap_and_membership():
    x1 = sample_normal(300, 2, 1)
    x2 = sample_normal(250, 2, 2)
    model = fit_ulsif(x1, x2, GRID, n_centers=100)
    assert model.centers.shape == (100, 2)
    num_rows = {tuple(r) for r in x2}
    assert all(tuple(r) in num_rows for r in model.centers)
    small = fit_ulsif(x1, x2[:40], GRID, n_centers=100)
    assert small.centers.shape == (40, 2)


def test_fit_is_deterministic():
    x1 = sample_normal(200, 1, 3)
    x2 = sample_normal(200, 1, 4)
    a = fit_ulsif(x1, x2, GRID)
    b = fit_ulsif(x1, x2, GRID)
    assert np.array_equal(a.alpha, b.alpha)
    assert (a.sigma, a.ridge) == (b.sigma, b.ridge)


def test_zero_coefficients_predict_zero():
    centers = sample_normal(10, 1, 5)
    model = RatioModel(centers=centers, alpha=np.zeros(10), sigma=1.0, ridge=0.5)
    q = sample_normal(7, 1, 6)
    assert np.array_equal(predict_ratio(model, q), np.zeros(7))


def test_prediction_is_kernel_expansion():
    from mised.kernels import kernel_matrix
    x1 = sample_normal(150, 2, 7)
    x2 = sample_normal(150, 2, 8)
    model = fit_ulsif(x1, x2, GRID)
    q = sample_normal(20, 2, 9)
    ref = kernel_matrix(q, model.centers, model.sigma) @ model.alpha
    np.testing.assert_allclose(predict_ratio(model, q), ref, rtol=1e-12)


def test_input_validation():
    with pytest.raises(ValueError):
        fit_ulsif(np.zeros((0, 1)), np.zeros((5, 1)), GRID)
    with pytest.raises(ValueError):
        fit_ulsif(np.zeros((5, 1)), np.zeros((5, 2)), GRID)
