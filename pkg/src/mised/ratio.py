"""Direct density-ratio estimation by regularized least squares.

Models the ratio w(x) = p_num(x) / p_den(x) as a Gaussian kernel expansion
w(x) = sum_l alpha_l psi_l(x) and fits alpha by minimizing

    (1/2) E_den[w(x)^2] - E_num[w(x)] + (ridge/2) ||alpha||^2

whose empirical minimizer is alpha = (H + ridge I)^{-1} h with H the
denominator-sample second moment of the kernel features and h the
numerator-sample feature mean.  Hyper-parameters are chosen by the same
hold-out criterion on validation folds.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import solve_regularized
from .errors import NumericalError
from .derivatives import CvGrid, _select_from_table, seeded_folds
from .kernels import _rows, kernel_matrix, subsample_rows


@dataclass
class RatioModel:
    centers: np.ndarray
    alpha: np.ndarray
    sigma: float
    ridge: float


def predict_ratio(model: RatioModel, queries) -> np.ndarray:
    """Ratio values w(x); unconstrained, so small negatives can occur and
    callers that need positivity clamp them."""
    return kernel_matrix(queries, model.centers, model.sigma) @ model.alpha


def _ulsif_alpha(x_den, x_num, centers, sigma, ridge):
    feats_den = kernel_matrix(x_den, centers, sigma)
    h_mat = feats_den.T @ feats_den / x_den.shape[0]
    h_vec = kernel_matrix(x_num, centers, sigma).mean(axis=0)
    system = h_mat + ridge * np.eye(centers.shape[0])
    return solve_regularized(system, h_vec, context="ratio fit")


def fit_ulsif(samples_den, samples_num, grid: CvGrid,
              n_centers: int = 100) -> RatioModel:
    """Fit a density-ratio model with cross-validated hyper-parameters.

    Parameters
    ----------
    samples_den : draws from the denominator density.
    samples_num : draws from the numerator density; kernel centers are a
        uniform-random subset of these (at most n_centers, seeded from the
        grid).
    grid : hyper-parameter candidates and fold layout.

    The hold-out score of a candidate is
    (1/2) mean_den[w^2] - mean_num[w] on the validation folds, averaged;
    ties prefer the larger ridge, then the larger sigma.
    """
    x_den = _rows(samples_den, "samples_den")
    x_num = _rows(samples_num, "samples_num")
    if x_den.shape[1] != x_num.shape[1]:
        raise ValueError("sample sets disagree on dimension")
    centers = subsample_rows(x_num, n_centers, grid.seed)

    folds_den = seeded_folds(x_den, grid.folds, grid.seed)
    folds_num = seeded_folds(x_num, grid.folds, grid.seed + 1)

    table = np.zeros((len(grid.sigmas), len(grid.ridges)))
    for si, sigma in enumerate(grid.sigmas):
        for ri, ridge in enumerate(grid.ridges):
            score = 0.0
            try:
                for (tr_d, te_d), (tr_n, te_n) in zip(folds_den, folds_num):
                    alpha = _ulsif_alpha(x_den[tr_d], x_num[tr_n],
                                         centers, sigma, ridge)
                    w_den = kernel_matrix(x_den[te_d], centers, sigma) @ alpha
                    w_num = kernel_matrix(x_num[te_n], centers, sigma) @ alpha
                    score += 0.5 * float(np.mean(w_den**2)) - float(np.mean(w_num))
            except NumericalError:
                score = np.inf
            table[si, ri] = score / grid.folds

    table[~np.isfinite(table)] = np.inf
    si, ri = _select_from_table(table, grid, "ratio cv")
    sigma, ridge = grid.sigmas[si], grid.ridges[ri]
    alpha = _ulsif_alpha(x_den, x_num, centers, sigma, ridge)
    return RatioModel(centers=centers, alpha=alpha, sigma=sigma, ridge=ridge)
