"""Gaussian kernel density estimation and its analytic derivatives.

The reference approach to density-derivative estimation: estimate the
density first with a normalized Gaussian mixture

    p_hat(x) = (1/n) sum_i (2 pi h^2)^{-d/2} exp(-||x - x_i||^2 / (2 h^2))

and differentiate that.  Every derivative is again closed form through the
Hermite factorization in kernels.py.  Bandwidth selection reuses the
integrated-squared-error hold-out criterion of the direct estimator, with
the derivative of the mixture plugged in as the candidate model, so both
estimators are tuned for the same target.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .kernels import (
    _check_sigma,
    _rows,
    check_multi_index,
    deriv_overlap_matrix,
    kernel_matrix,
    multi_indices,
    partial_matrices,
)
from .derivatives import CvGrid, _select_from_table, seeded_folds


@dataclass
class KdeModel:
    samples: np.ndarray
    bandwidth: float

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def fit_kde(samples, bandwidth: float) -> KdeModel:
    """Bind samples and a bandwidth into a mixture density model."""
    samples = _rows(samples, "samples")
    return KdeModel(samples=samples, bandwidth=_check_sigma(bandwidth))


def _norm_const(model: KdeModel) -> float:
    return (2.0 * np.pi * model.bandwidth**2) ** (-model.dim / 2.0)


def kde_density(model: KdeModel, queries) -> np.ndarray:
    """Mixture density values; integrates to one over R^d."""
    queries = _rows(queries, "queries")
    km = kernel_matrix(queries, model.samples, model.bandwidth)
    return _norm_const(model) * km.mean(axis=1)


def kde_derivative(model: KdeModel, j, queries) -> np.ndarray:
    """Exact partial derivative of the mixture density.

    j is a per-dimension multi-index; order zero returns the density.
    """
    queries = _rows(queries, "queries")
    j = check_multi_index(j, model.dim)
    if sum(j) == 0:
        return kde_density(model, queries)
    phi = partial_matrices(queries, model.samples, model.bandwidth, [j])[j]
    return _norm_const(model) * phi.mean(axis=1)


def cross_validate_kde(samples, order: int, grid: CvGrid) -> float:
    """Bandwidth selection for derivative estimation by cross-validation.

    For each candidate bandwidth (taken from grid.sigmas) and fold, the
    mixture is built on the training part and scored with

        int (D^j p_hat)^2 dx  -  2 (-1)^k mean over held-out x of (D^2j p_hat)(x)

    summed over all multi-indices j of the order.  The squared-norm term
    is exact via pairwise integrals of kernel derivatives; the second term
    applies D^j to D^j p_hat, giving the order-2k mixture derivative.
    Ties prefer the larger bandwidth.
    """
    samples = _rows(samples, "samples")
    if order < 1:
        raise ValueError("order must be at least 1")
    d = samples.shape[1]
    indices = multi_indices(order, d)
    sign = (-1.0) ** order
    folds = seeded_folds(samples, grid.folds, grid.seed)

    scores = np.zeros(len(grid.sigmas))
    for bi, h in enumerate(grid.sigmas):
        total = 0.0
        for train, test in folds:
            x_tr = samples[train]
            n_tr = x_tr.shape[0]
            model = KdeModel(samples=x_tr, bandwidth=h)
            const = _norm_const(model)
            value = 0.0
            doubled = partial_matrices(
                samples[test], x_tr, h, [tuple(2 * v for v in j) for j in indices])
            for j in indices:
                overlap = deriv_overlap_matrix(x_tr, x_tr, h, j)
                quad = (const / n_tr) ** 2 * float(overlap.sum())
                d2j = const * doubled[tuple(2 * v for v in j)].mean(axis=1)
                value += quad - 2.0 * sign * float(d2j.mean())
            total += value
        scores[bi] = total / grid.folds

    scores[~np.isfinite(scores)] = np.inf
    if not np.isfinite(scores).any():
        raise NumericalError("kde cv: no bandwidth produced a finite score")
    table = scores[:, None]
    bi, _ = _select_from_table(table, grid, "kde cv")
    return grid.sigmas[bi]
