"""Direct derivative estimator: solver correctness, symmetries, CV plumbing."""

import numpy as np
import pytest

from mised.datasets import sample_normal
from mised.derivatives import (
    CvGrid,
    cross_validate_mised,
    default_cv_grid,
    fit_mised,
    load_model,
    mised_objective,
    predict_derivative,
    save_model,
    seeded_folds,
)
from mised.errors import NumericalError
from mised.kernels import gauss_kernel, gram_matrix, h_vector, multi_indices
from oracles import cg_solve, quad_line

SMALL_GRID = CvGrid(sigmas=(0.7, 1.5, 3.0), ridges=(0.1, 1.0, 10.0))


def test_coefficients_match_conjugate_gradient():
    rng = np.random.default_rng(0)
    for _ in range(5):
        n, d = int(rng.integers(8, 25)), int(rng.integers(1, 3))
        order = int(rng.integers(1, 3))
        sigma = float(rng.uniform(0.8, 2.0))
        ridge = float(rng.uniform(0.05, 2.0))
        x = rng.standard_normal((n, d))
        model = fit_mised(x, order, sigma, ridge)
        a = gram_matrix(x, sigma) + ridge * np.eye(n)
        for j in multi_indices(order, d):
            b = (-1.0) ** order * h_vector(x, x, sigma, j)
            ref = cg_solve(a, b)
            assert np.max(np.abs(model.coeffs[j] - ref)) < 1e-8


def test_fit_covers_every_multi_index():
    x = sample_normal(40, 2, 0)
    model = fit_mised(x, 2, 1.2, 0.5)
    assert set(model.coeffs) == set(multi_indices(2, 2))
    assert model.order == 2 and model.sigma == 1.2 and model.ridge == 0.5
    assert np.array_equal(model.centers, x)
    for theta in model.coeffs.values():
        assert theta.shape == (40,) and np.all(np.isfinite(theta))


def test_explicit_centers_and_subset_cap():
    x = sample_normal(60, 1, 1)
    c = x[:10]
    model = fit_mised(x, 1, 1.0, 0.5, centers=c)
    assert np.array_equal(model.centers, c)
    capped = fit_mised(x, 1, 1.0, 0.5, subset_cap=20, subset_seed=4)
    assert capped.centers.shape == (20, 1)
    again = fit_mised(x, 1, 1.0, 0.5, subset_cap=20, subset_seed=4)
    assert np.array_equal(capped.coeffs[(1,)], again.coeffs[(1,)])


def test_predict_is_kernel_expansion():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((15, 2))
    model = fit_mised(x, 1, 1.1, 0.3)
    q = rng.standard_normal((6, 2))
    for j in [(1, 0), (0, 1)]:
        got = predict_derivative(model, j, q)
        ref = np.array([
            sum(model.coeffs[j][l] * gauss_kernel(qi, model.centers[l], 1.1)
                for l in range(15)) for qi in q])
        np.testing.assert_allclose(got, ref, rtol=1e-12)
    with pytest.raises(ValueError):
        predict_derivative(model, (2, 0), q)


def test_translation_equivariance():
    x = sample_normal(80, 2, 3)
    shift = np.array([3.7, -1.2])
    q = sample_normal(10, 2, 4)
    base = fit_mised(x, 2, 1.3, 0.7)
    moved = fit_mised(x + shift, 2, 1.3, 0.7)
    for j in multi_indices(2, 2):
        np.testing.assert_allclose(
            predict_derivative(moved, j, q + shift),
            predict_derivative(base, j, q), rtol=1e-9, atol=1e-12)


def test_reflection_equivariance_is_exact():
    x = sample_normal(50, 1, 5)
    q = sample_normal(8, 1, 6)
    for order in (1, 2):
        base = fit_mised(x, order, 1.0, 0.5)
        mirrored = fit_mised(-x, order, 1.0, 0.5)
        j = (order,)
        lhs = predict_derivative(mirrored, j, -q)
        rhs = (-1.0) ** order * predict_derivative(base, j, q)
        assert np.array_equal(lhs, rhs)


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_singular_system_raises():
    x = np.array([[0.0], [0.0], [0.0], [1.0], [1.0]])
    with pytest.raises(NumericalError):
        fit_mised(x, 1, 1.0, 0.0)


def test_bad_arguments():
    x = sample_normal(20, 1, 7)
    with pytest.raises(ValueError):
        fit_mised(x, 0, 1.0, 0.5)
    with pytest.raises(ValueError):
        fit_mised(x, 1, -1.0, 0.5)
    with pytest.raises(ValueError):
        fit_mised(x, 1, 1.0, -0.1)


def test_objective_quadratic_term_matches_quadrature():
    x = sample_normal(30, 1, 8)
    model = fit_mised(x, 1, 1.2, 0.8)
    heldout = sample_normal(25, 1, 9)
    theta = model.coeffs[(1,)]

    def g(t):
        return sum(theta[l] * gauss_kernel([t], model.centers[l], 1.2)
                   for l in range(30))

    quad = quad_line(lambda t: g(t) ** 2, -12.0, 12.0)
    # the cross term is a plain sample average of the model's derivative
    dg = [(g(t + 1e-5) - g(t - 1e-5)) / 2e-5 for t in heldout.ravel()]
    ref = quad + 2.0 * float(np.mean(dg))
    assert mised_objective(model, (1,), heldout) == pytest.approx(ref, abs=1e-6)


def test_objective_ranks_cv_choice_over_corners():
    grid = default_cv_grid()
    corners = [(grid.sigmas[0], grid.ridges[0]), (grid.sigmas[0], grid.ridges[-1]),
               (grid.sigmas[-1], grid.ridges[0]), (grid.sigmas[-1], grid.ridges[-1])]
    wins = 0
    for seed in range(10):
        x = sample_normal(500, 1, seed)
        fresh = sample_normal(500, 1, 5000 + seed)
        sigma, ridge, _ = cross_validate_mised(x, 1, CvGrid(seed=seed))
        chosen = mised_objective(fit_mised(x, 1, sigma, ridge), (1,), fresh)
        worst = max(mised_objective(fit_mised(x, 1, cs, cr), (1,), fresh)
                    for cs, cr in corners)
        wins += chosen < worst
    # occasional overfit picks at the small-sigma corner cost a seed or two
    assert wins >= 8


def test_seeded_folds_partition_and_determinism():
    x = sample_normal(53, 2, 10)
    folds = seeded_folds(x, 5, seed=2)
    assert len(folds) == 5
    tests = [test for _, test in folds]
    assert sorted(np.concatenate(tests)) == list(range(53))
    assert max(len(t) for t in tests) - min(len(t) for t in tests) <= 1
    for train, test in folds:
        assert sorted(np.concatenate([train, test])) == list(range(53))
        assert len(np.intersect1d(train, test)) == 0
    again = seeded_folds(x, 5, seed=2)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(folds, again))
    other = seeded_folds(x, 5, seed=3)
    assert any(not np.array_equal(a[1], b[1]) for a, b in zip(folds, other))
    with pytest.raises(ValueError):
        seeded_folds(x, 54, seed=0)


def test_folds_are_row_order_canonical():
    # fold membership tracks sample values, not input row order
    x = sample_normal(40, 2, 11)
    perm = np.random.default_rng(1).permutation(40)
    base = seeded_folds(x, 5, seed=0)
    shuffled = seeded_folds(x[perm], 5, seed=0)
    for (_, a), (_, b) in zip(base, shuffled):
        assert np.array_equal(x[a], x[perm][b])


def test_cross_validation_selection():
    x = sample_normal(120, 1, 12)
    sigma, ridge, table = cross_validate_mised(x, 1, SMALL_GRID)
    assert sigma in SMALL_GRID.sigmas and ridge in SMALL_GRID.ridges
    assert table.shape == (3, 3)
    assert np.all(np.isfinite(table))
    assert table[SMALL_GRID.sigmas.index(sigma),
                 SMALL_GRID.ridges.index(ridge)] == table.min()
    # identical call, identical table
    _, _, table2 = cross_validate_mised(x, 1, SMALL_GRID)
    assert np.array_equal(table, table2)


def test_cross_validation_row_permutation_invariance():
    x = sample_normal(90, 1, 13)
    perm = np.random.default_rng(2).permutation(90)
    s1, r1, t1 = cross_validate_mised(x, 1, SMALL_GRID)
    s2, r2, t2 = cross_validate_mised(x[perm], 1, SMALL_GRID)
    assert (s1, r1) == (s2, r2)
    np.testing.assert_allclose(t1, t2, rtol=1e-12, atol=1e-14)


def test_cross_validation_single_candidate():
    x = sample_normal(60, 1, 14)
    grid = CvGrid(sigmas=(1.5,), ridges=(0.7,))
    sigma, ridge, table = cross_validate_mised(x, 1, grid)
    assert (sigma, ridge) == (1.5, 0.7)
    assert table.shape == (1, 1)


def test_cv_tie_break_prefers_stronger_regularization():
    # a constant score table must resolve to the largest ridge, then sigma
    from mised.derivatives import _select_from_table
    grid = CvGrid(sigmas=(0.7, 1.5), ridges=(0.1, 1.0))
    si, ri = _select_from_table(np.zeros((2, 2)), grid, "test")
    assert (grid.sigmas[si], grid.ridges[ri]) == (1.5, 1.0)
    # a strict minimum wins regardless of position
    table = np.ones((2, 2))
    table[0, 1] = -1.0
    assert _select_from_table(table, grid, "test") == (0, 1)


def test_model_serialization_round_trip(tmp_path):
    x = sample_normal(35, 2, 15)
    model = fit_mised(x, 2, 1.7, 0.9)
    path = str(tmp_path / "model.json")
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.sigma == model.sigma and loaded.ridge == model.ridge
    assert loaded.order == model.order
    assert np.array_equal(loaded.centers, model.centers)
    assert set(loaded.coeffs) == set(model.coeffs)
    for j in model.coeffs:
        assert np.array_equal(loaded.coeffs[j], model.coeffs[j])
    q = sample_normal(5, 2, 16)
    for j in model.coeffs:
        assert np.array_equal(predict_derivative(loaded, j, q),
                              predict_derivative(model, j, q))
