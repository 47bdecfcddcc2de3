"""Direct least-squares estimation of density derivatives.

Given samples x_1..x_n from an unknown density p, the estimator models a
single partial derivative of p as a kernel expansion

    g_j(x) = sum_l theta_l psi_l(x),     psi_l(x) = exp(-||x - c_l||^2 / (2 sigma^2))

and fits theta by minimizing the integrated squared error to the true
derivative.  Expanding that error and dropping the constant term gives the
criterion

    theta' G theta - 2 (-1)^k theta' h_j + ridge ||theta||^2

where G collects exact integrals of kernel products and h_j collects
sample averages of kernel partials; the sign flip comes from moving the
derivative off the unknown density by integration by parts.  The minimizer
is the regularized linear solve

    theta_j = (-1)^k (G + ridge I)^{-1} h_j

so no density estimate is formed at any point.  All derivatives of one
total order share (sigma, ridge), selected by cross-validation on the same
integrated-error criterion.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from ._linalg import solve_regularized
from .errors import NumericalError
from .kernels import (
    _check_sigma,
    _rows,
    check_multi_index,
    gram_matrix,
    h_vectors,
    kernel_matrix,
    multi_indices,
    partial_matrices,
    subsample_rows,
)

# candidate grids used throughout the experiments: nine log-spaced kernel
# widths in [10^-0.3, 10] and nine ridge values in [10^-1, 10]
DEFAULT_SIGMAS = tuple(10.0 ** np.linspace(-0.3, 1.0, 9))
DEFAULT_RIDGES = tuple(10.0 ** np.linspace(-1.0, 1.0, 9))


@dataclass(frozen=True)
class CvGrid:
    """Hyper-parameter search grid for cross-validation.

    sigmas and ridges are the candidate kernel widths and regularization
    strengths, folds the number of validation splits, seed the source of
    the (deterministic) fold assignment.
    """

    sigmas: tuple = DEFAULT_SIGMAS
    ridges: tuple = DEFAULT_RIDGES
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "ridges", tuple(float(r) for r in self.ridges))
        if len(self.sigmas) == 0 or len(self.ridges) == 0:
            raise ValueError("candidate lists must be non-empty")
        if any(s <= 0 for s in self.sigmas) or any(r < 0 for r in self.ridges):
            raise ValueError("sigma candidates must be > 0, ridges >= 0")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")


def default_cv_grid(seed: int = 0) -> CvGrid:
    return CvGrid(seed=seed)


def seeded_folds(samples: np.ndarray, folds: int, seed: int):
    """Deterministic, order-independent fold assignment.

    Rows are brought into a canonical order (lexicographic sort by
    coordinates) before the seeded shuffle, so permuting the input rows
    changes nothing.  Returns a list of (train_idx, test_idx) pairs.
    """
    n = samples.shape[0]
    if folds > n:
        raise ValueError("more folds than samples")
    canon = np.lexsort(samples.T[::-1])
    perm = canon[np.random.default_rng(seed).permutation(n)]
    parts = np.array_split(perm, folds)
    out = []
    for t in range(folds):
        test = parts[t]
        train = np.concatenate([parts[s] for s in range(folds) if s != t])
        out.append((train, test))
    return out


@dataclass
class MisedModel:
    """Fitted derivative model: one coefficient vector per multi-index.

    coeffs maps each multi-index of total order `order` to the theta
    vector of its kernel expansion around `centers`.
    """

    centers: np.ndarray
    sigma: float
    ridge: float
    order: int
    coeffs: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def fit_mised(samples, order: int, sigma: float, ridge: float,
              centers=None, subset_cap=None, subset_seed: int = 0) -> MisedModel:
    """Fit kernel models of every density partial of one total order.

    Parameters
    ----------
    samples : (n, d) data matrix, n >= 2.
    order : total derivative order k >= 1.
    sigma : kernel width.
    ridge : regularization strength >= 0.
    centers : optional explicit kernel centers; defaults to the samples.
    subset_cap : optional cap on the number of centers, drawn uniformly
        at random (seeded) when the default centers are used.

    Returns
    -------
    MisedModel with one coefficient vector per multi-index of the order.

    Each solve is certified: the residual of (G + ridge I) theta = +-h_j
    must be below 1e-8 relative to ||h_j||, otherwise a NumericalError is
    raised rather than returning an unreliable fit.
    """
    samples = _rows(samples, "samples")
    if samples.shape[0] < 2:
        raise ValueError("need at least two samples")
    if order < 1:
        raise ValueError("order must be at least 1")
    sigma = _check_sigma(sigma)
    ridge = float(ridge)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if centers is None:
        centers = subsample_rows(samples, subset_cap, subset_seed)
    else:
        centers = _rows(centers, "centers")
        if centers.shape[1] != samples.shape[1]:
            raise ValueError("centers and samples disagree on dimension")

    d = samples.shape[1]
    indices = multi_indices(order, d)
    h = h_vectors(centers, samples, sigma, indices)
    gram = gram_matrix(centers, sigma)
    system = gram + ridge * np.eye(centers.shape[0])
    sign = (-1.0) ** order
    rhs = np.column_stack([sign * h[j] for j in indices])
    theta = solve_regularized(system, rhs, context="derivative fit")
    coeffs = {j: theta[:, i].copy() for i, j in enumerate(indices)}
    return MisedModel(centers=centers, sigma=sigma, ridge=ridge,
                      order=order, coeffs=coeffs)


def predict_derivative(model: MisedModel, j, queries) -> np.ndarray:
    """Evaluate the fitted model of one partial derivative.

    The value at x is theta_j' psi(x), the plain kernel expansion; the
    derivative order lives in how theta_j was fitted, not in the features.
    """
    queries = _rows(queries, "queries")
    j = check_multi_index(j, model.dim)
    if j not in model.coeffs:
        raise ValueError(f"model holds no coefficients for multi-index {j}")
    return kernel_matrix(queries, model.centers, model.sigma) @ model.coeffs[j]


def mised_objective(model: MisedModel, j, heldout) -> float:
    """Hold-out value of the integrated-squared-error criterion.

    For the model g of the j-partial this is

        int g^2 dx  -  2 (-1)^k mean over heldout x of (D^j g)(x)

    with the first integral exact through the Gram matrix.  Up to a
    constant independent of the model, this estimates the integrated
    squared error of g against the true density partial, so lower is
    better.
    """
    heldout = _rows(heldout, "heldout")
    j = check_multi_index(j, model.dim)
    if j not in model.coeffs:
        raise ValueError(f"model holds no coefficients for multi-index {j}")
    theta = model.coeffs[j]
    gram = gram_matrix(model.centers, model.sigma)
    quad = float(theta @ gram @ theta)
    k = sum(j)
    phi = partial_matrices(heldout, model.centers, model.sigma, [j])[j]
    cross = 2.0 * (-1.0) ** k * float(np.mean(phi @ theta))
    return quad - cross


def _select_from_table(table: np.ndarray, grid: CvGrid, what: str):
    """Pick the (sigma, ridge) cell with the lowest score.

    Ties prefer the larger ridge, then the larger sigma, so degenerate
    flat score surfaces resolve to the most regularized candidate.
    """
    finite = np.isfinite(table)
    if not finite.any():
        raise NumericalError(f"{what}: no hyper-parameter candidate produced "
                             "a finite validation score")
    best = np.min(table[finite])
    si, ri = np.nonzero((table == best) & finite)
    pick = np.lexsort((si, ri))[-1]
    return int(si[pick]), int(ri[pick])


def cross_validate_mised(samples, order: int, grid: CvGrid, subset_cap=None):
    """Select (sigma, ridge) for fit_mised by T-fold cross-validation.

    The score of a candidate pair is the hold-out criterion of
    mised_objective summed over every multi-index of the order, averaged
    over folds.  Candidates whose fits fail numerically score +inf.

    Returns
    -------
    (sigma, ridge, table) where table[i, l] is the score of
    (grid.sigmas[i], grid.ridges[l]).
    """
    samples = _rows(samples, "samples")
    if order < 1:
        raise ValueError("order must be at least 1")
    d = samples.shape[1]
    indices = multi_indices(order, d)
    sign = (-1.0) ** order
    folds = seeded_folds(samples, grid.folds, grid.seed)

    table = np.zeros((len(grid.sigmas), len(grid.ridges)))
    for si, sigma in enumerate(grid.sigmas):
        fold_scores = np.zeros((grid.folds, len(grid.ridges)))
        for t, (train, test) in enumerate(folds):
            centers = subsample_rows(samples[train], subset_cap, grid.seed + t)
            h = h_vectors(centers, samples[train], sigma, indices)
            rhs = np.column_stack([sign * h[j] for j in indices])
            gram = gram_matrix(centers, sigma)
            phi_te = partial_matrices(samples[test], centers, sigma, indices)
            cross_mat = np.column_stack(
                [2.0 * sign * phi_te[j].mean(axis=0) for j in indices])
            eye = np.eye(centers.shape[0])
            for ri, ridge in enumerate(grid.ridges):
                try:
                    theta = solve_regularized(gram + ridge * eye, rhs,
                                              context="cv fit")
                except NumericalError:
                    fold_scores[t, ri] = np.inf
                    continue
                quad = float(np.sum(theta * (gram @ theta)))
                cross = float(np.sum(theta * cross_mat))
                fold_scores[t, ri] = quad - cross
        table[si] = fold_scores.mean(axis=0)

    table[~np.isfinite(table)] = np.inf
    si, ri = _select_from_table(table, grid, "derivative cv")
    return grid.sigmas[si], grid.ridges[ri], table


def save_model(model: MisedModel, path: str):
    """Write a fitted model to JSON.

    Floats go through repr, so a load followed by a save reproduces the
    numbers bit for bit.
    """
    doc = {
        "d": model.dim,
        "k": model.order,
        "sigma": model.sigma,
        "lambda": model.ridge,
        "centers": [[float(v) for v in row] for row in model.centers],
        "coeffs": {",".join(str(v) for v in j): [float(v) for v in theta]
                   for j, theta in model.coeffs.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path: str) -> MisedModel:
    """Read a model written by save_model."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    centers = np.asarray(doc["centers"], dtype=float)
    coeffs = {}
    for key, values in doc["coeffs"].items():
        j = tuple(int(v) for v in key.split(","))
        coeffs[check_multi_index(j, int(doc["d"]))] = np.asarray(values, dtype=float)
    return MisedModel(centers=centers, sigma=float(doc["sigma"]),
                      ridge=float(doc["lambda"]), order=int(doc["k"]),
                      coeffs=coeffs)
