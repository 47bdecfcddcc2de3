"""KL-divergence estimation from two samples.

The workhorse is the nearest-neighbor estimator

    KL(p1 || p2) ~= (1/n1) sum_i log[ n2 d2(x_i)^d / ((n1-1) d1(x_i)^d) ]

where d1 is the distance from x_i to its nearest neighbor within the first
sample (excluding itself) and d2 the distance to the second sample: each
distance is a one-neighbor density estimate (small d1 means large p1), and
the average log ratio of the two estimates is the divergence.  Its
metric-learned variant replaces Euclidean balls with ellipsoids: every
anchor x_i carries a unit-determinant positive-definite matrix A_i and
distances become sqrt((x - x')' A_i (x - x')).

The matrix field comes from second-order information: with Hessians of the
two densities and their ratio at an anchor, the matrix

    B = (n1-1)^{-2/d} (p2/p1)^{2/d+1} H1 - n2^{-2/d} H2

captures the direction-dependent part of the estimator's bias, and the
metric is built from B's eigendecomposition so that expansion along
bias-increasing directions trades off against contraction along the rest.
Plugging in direct derivative fits gives the flagship estimator
(mised_metric_kl); plugging in fitted Gaussians gives a parametric variant
(gaussian_metric_kl); fitted Gaussians alone give the closed-form
baseline (gaussian_parametric_kl).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EventCounter, NumericalError
from .derivatives import (
    CvGrid,
    MisedModel,
    cross_validate_mised,
    default_cv_grid,
    fit_mised,
    predict_derivative,
)
from .kernels import _rows, multi_indices
from .ratio import fit_ulsif, predict_ratio

# distance floor substituted for exact duplicates; every substitution is
# counted here so callers can tell the estimate was patched
DIST_FLOOR = 1e-12
zero_distance_events = EventCounter()


def _checked_pair(x1, x2):
    x1 = _rows(x1, "x1")
    x2 = _rows(x2, "x2")
    if x1.shape[1] != x2.shape[1]:
        raise ValueError("sample sets disagree on dimension")
    if x1.shape[0] < 2:
        raise ValueError("need at least two rows in x1")
    return x1, x2


def _floored(dist: float) -> float:
    if dist <= 0.0:
        zero_distance_events.add()
        return DIST_FLOOR
    return dist


def _kl_from_sq(sq1, sq2, n1: int, n2_eff: int, d: int) -> float:
    # log form keeps d-th powers of distances from overflowing
    total = 0.0
    for m1, m2 in zip(sq1, sq2):
        r1 = _floored(float(np.sqrt(np.maximum(m1, 0.0))))
        r2 = _floored(float(np.sqrt(np.maximum(m2, 0.0))))
        total += np.log(float(n2_eff)) - np.log(n1 - 1.0) \
            + d * (np.log(r2) - np.log(r1))
    return total / len(sq1)


def nn_kl(x1, x2, x1_rows_in_x2=None) -> float:
    """Nearest-neighbor KL divergence of p1 from p2 given samples of each.

    Parameters
    ----------
    x1, x2 : sample matrices with matching dimension; x1 needs >= 2 rows.
    x1_rows_in_x2 : optional index array saying that row i of x1 is row
        x1_rows_in_x2[i] of x2.  Those entries are skipped when searching
        x2 and the x2 count drops by one, which is the in-sample variant
        needed when x2 is a pooled sample containing x1.

    Exact duplicate points produce zero distances; these are replaced by a
    tiny floor and counted in zero_distance_events.  The estimate is
    invariant under any rotation, translation and uniform scaling applied
    to both samples.
    """
    x1, x2 = _checked_pair(x1, x2)
    n1, d = x1.shape
    n2 = x2.shape[0]
    if x1_rows_in_x2 is not None:
        x1_rows_in_x2 = np.asarray(x1_rows_in_x2, dtype=int)
        if x1_rows_in_x2.shape[0] != n1:
            raise ValueError("need one x2 index per x1 row")
        if n2 < 2:
            raise ValueError("x2 must keep at least one usable row")
    n2_eff = n2 - 1 if x1_rows_in_x2 is not None else n2

    sq1 = np.empty(n1)
    sq2 = np.empty(n1)
    for i in range(n1):
        z1 = x1 - x1[i]
        s1 = (z1 * z1).sum(axis=1)
        s1[i] = np.inf
        sq1[i] = s1.min()
        z2 = x2 - x1[i]
        s2 = (z2 * z2).sum(axis=1)
        if x1_rows_in_x2 is not None:
            s2[x1_rows_in_x2[i]] = np.inf
        sq2[i] = s2.min()
    return _kl_from_sq(sq1, sq2, n1, n2_eff, d)


@dataclass
class LocalMetric:
    """Unit-determinant positive-definite matrix attached to an anchor."""

    matrix: np.ndarray
    anchor: np.ndarray = None


def _metric_array(metrics, n1: int, d: int) -> np.ndarray:
    if isinstance(metrics, np.ndarray):
        arr = metrics
    else:
        arr = np.stack([m.matrix if isinstance(m, LocalMetric) else np.asarray(m)
                        for m in metrics])
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (n1, d, d):
        raise ValueError("need one d-by-d metric per x1 row")
    if not np.all(np.isfinite(arr)):
        raise ValueError("metrics contain non-finite values")
    return arr


def nn_kl_metric(x1, x2, metrics, x1_rows_in_x2=None) -> float:
    """Nearest-neighbor KL divergence under per-anchor local metrics.

    metrics supplies one positive-definite matrix per x1 row (an array of
    shape (n1, d, d), or a sequence of LocalMetric); distances from anchor
    x_i to both samples are measured in the quadratic form of its matrix.
    With every matrix the identity this reduces exactly to nn_kl.
    """
    x1, x2 = _checked_pair(x1, x2)
    n1, d = x1.shape
    n2 = x2.shape[0]
    a_mats = _metric_array(metrics, n1, d)
    if x1_rows_in_x2 is not None:
        x1_rows_in_x2 = np.asarray(x1_rows_in_x2, dtype=int)
        if x1_rows_in_x2.shape[0] != n1:
            raise ValueError("need one x2 index per x1 row")
        if n2 < 2:
            raise ValueError("x2 must keep at least one usable row")
    n2_eff = n2 - 1 if x1_rows_in_x2 is not None else n2

    sq1 = np.empty(n1)
    sq2 = np.empty(n1)
    for i in range(n1):
        a = a_mats[i]
        z1 = x1 - x1[i]
        s1 = ((z1 @ a) * z1).sum(axis=1)
        s1[i] = np.inf
        sq1[i] = s1.min()
        z2 = x2 - x1[i]
        s2 = ((z2 @ a) * z2).sum(axis=1)
        if x1_rows_in_x2 is not None:
            s2[x1_rows_in_x2[i]] = np.inf
        sq2[i] = s2.min()
    return _kl_from_sq(sq1, sq2, n1, n2_eff, d)


def build_b_tilde(h1, h2, ratio: float, n1: int, n2: int) -> np.ndarray:
    """Bias-direction matrix from local second-order information.

    h1, h2 are the Hessians of the two densities at one anchor, ratio the
    value p2/p1 there (must be positive; clamp before calling).  Returns

        (n1-1)^{-2/d} ratio^{2/d+1} h1 - n2^{-2/d} h2

    which is linear in (h1, h2) and zero when ratio = 1, n1 - 1 = n2 and
    h1 = h2.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    if h1.ndim != 2 or h1.shape[0] != h1.shape[1] or h1.shape != h2.shape:
        raise ValueError("hessians must be square matrices of equal shape")
    if not (np.all(np.isfinite(h1)) and np.all(np.isfinite(h2))):
        raise ValueError("hessians contain non-finite values")
    ratio = float(ratio)
    if not np.isfinite(ratio) or ratio <= 0.0:
        raise ValueError("ratio must be positive")
    if n1 < 2 or n2 < 1:
        raise ValueError("need n1 >= 2 and n2 >= 1")
    d = h1.shape[0]
    ex = 2.0 / d
    return (n1 - 1.0) ** (-ex) * ratio ** (ex + 1.0) * h1 - float(n2) ** (-ex) * h2


def local_metric_from_b(b, eps_scale: float = 1e-10) -> np.ndarray:
    """Unit-determinant metric from a bias-direction matrix.

    Eigendirections of b with positive eigenvalues are where the local
    bias grows (distances there get stretched); negative ones are where it
    shrinks.  With d+ positive eigenvalues lam+ and d- negative ones lam-,
    the metric shares b's eigenvectors and has eigenvalues (d+ lam+) and
    (-d- lam-), floored at eps_scale times the largest magnitude, then
    rescaled to determinant one.  Degenerate inputs (all eigenvalues of
    one sign, or b vanishing) fall back to the identity, and the result is
    invariant to positive rescaling of b.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("b must be a square matrix")
    if not np.all(np.isfinite(b)):
        raise ValueError("b contains non-finite values")
    d = b.shape[0]
    sym = 0.5 * (b + b.T)
    if np.max(np.abs(sym - b)) > 1e-8 * max(1.0, np.max(np.abs(b))):
        raise ValueError("b must be symmetric")
    w, v = np.linalg.eigh(sym)
    top = np.max(np.abs(w))
    if top < 1e-12:
        return np.eye(d)
    n_pos = int(np.sum(w > 0.0))
    n_neg = int(np.sum(w < 0.0))
    if n_pos == 0 or n_neg == 0:
        return np.eye(d)
    eigs = np.where(w > 0.0, n_pos * w, np.where(w < 0.0, -n_neg * w, 0.0))
    eigs = np.maximum(eigs, eps_scale * top)
    loge = np.log(eigs)
    eigs = np.exp(loge - loge.mean())
    a = (v * eigs) @ v.T
    return 0.5 * (a + a.T)


def hessian_field(model: MisedModel, queries) -> np.ndarray:
    """Hessian matrices of the underlying density at each query point,
    assembled from a fitted order-2 derivative model."""
    if model.order != 2:
        raise ValueError("hessian_field needs a model of order 2")
    queries = _rows(queries, "queries")
    d = model.dim
    out = np.zeros((queries.shape[0], d, d))
    for j in multi_indices(2, d):
        vals = predict_derivative(model, j, queries)
        axes = [m for m in range(d) for _ in range(j[m])]
        a, b = axes[0], axes[1]
        out[:, a, b] = vals
        if a != b:
            out[:, b, a] = vals
    return out


@dataclass(frozen=True)
class MisedMetricConfig:
    """Knobs of the metric-learned KL pipeline.

    grid / ulsif_grid default to the standard candidate grids seeded from
    `seed`.  subset_cap limits kernel centers of the order-2 derivative
    fits; fixing sigma and ridge skips their cross-validation entirely
    (useful when many related calls can share one selection).
    """

    grid: CvGrid = None
    ulsif_grid: CvGrid = None
    subset_cap: int = 200
    ulsif_centers: int = 100
    ratio_floor: float = 1e-6
    fixed_sigma: float = None
    fixed_ridge: float = None
    seed: int = 0


def _order2_model(x, cfg: MisedMetricConfig) -> MisedModel:
    grid = cfg.grid if cfg.grid is not None else default_cv_grid(cfg.seed)
    if cfg.fixed_sigma is not None and cfg.fixed_ridge is not None:
        sigma, ridge = float(cfg.fixed_sigma), float(cfg.fixed_ridge)
    else:
        sigma, ridge, _ = cross_validate_mised(x, 2, grid, cfg.subset_cap)
    return fit_mised(x, 2, sigma, ridge,
                     subset_cap=cfg.subset_cap, subset_seed=grid.seed)


def metric_field(x1, x2, h1, h2, ratio_values, ratio_floor: float = 1e-6):
    """Per-anchor metrics from Hessian fields and ratio values at x1."""
    n1 = x1.shape[0]
    n2 = x2.shape[0]
    ratio_values = np.maximum(np.asarray(ratio_values, dtype=float), ratio_floor)
    return np.stack([
        local_metric_from_b(build_b_tilde(h1[i], h2[i], ratio_values[i], n1, n2))
        for i in range(n1)
    ])


def mised_metric_kl(x1, x2, config: MisedMetricConfig = None,
                    x1_rows_in_x2=None) -> float:
    """KL divergence via nearest neighbors under learned local metrics.

    Fits order-2 derivative models to both samples, a density-ratio model
    between them, turns the resulting Hessians and ratios at each x1 point
    into unit-determinant metrics, and runs the metric nearest-neighbor
    estimator.  Fully deterministic given the config seeds.
    """
    x1, x2 = _checked_pair(x1, x2)
    cfg = config if config is not None else MisedMetricConfig()
    model1 = _order2_model(x1, cfg)
    model2 = _order2_model(x2, cfg)
    h1 = hessian_field(model1, x1)
    h2 = hessian_field(model2, x1)
    ugrid = cfg.ulsif_grid if cfg.ulsif_grid is not None \
        else default_cv_grid(cfg.seed + 1)
    rmodel = fit_ulsif(x1, x2, ugrid, cfg.ulsif_centers)
    ratios = predict_ratio(rmodel, x1)
    metrics = metric_field(x1, x2, h1, h2, ratios, cfg.ratio_floor)
    return nn_kl_metric(x1, x2, metrics, x1_rows_in_x2=x1_rows_in_x2)


def _gaussian_moments(x, name: str):
    n, d = x.shape
    if n <= d:
        raise ValueError(f"{name}: need more rows than dimensions "
                         "for a Gaussian fit")
    mu = x.mean(axis=0)
    z = x - mu
    cov = z.T @ z / n
    return mu, cov


def _chol_or_fail(cov, name: str):
    try:
        return scipy.linalg.cho_factor(cov, check_finite=False)
    except scipy.linalg.LinAlgError:
        raise NumericalError(
            f"{name}: singular covariance; regularize or drop degenerate "
            "dimensions") from None


def gaussian_parametric_kl(x1, x2) -> float:
    """Closed-form KL divergence between Gaussians fitted to each sample.

    Maximum-likelihood moments (1/n covariance), then

        0.5 [ tr(S2^-1 S1) + dm' S2^-1 dm - d + ln det S2 - ln det S1 ].

    Invariant under one shared invertible affine map of both samples.
    """
    x1, x2 = _checked_pair(x1, x2)
    mu1, cov1 = _gaussian_moments(x1, "x1")
    mu2, cov2 = _gaussian_moments(x2, "x2")
    d = x1.shape[1]
    c1 = _chol_or_fail(cov1, "x1")
    c2 = _chol_or_fail(cov2, "x2")
    logdet1 = 2.0 * float(np.sum(np.log(np.diag(c1[0]))))
    logdet2 = 2.0 * float(np.sum(np.log(np.diag(c2[0]))))
    trace = float(np.trace(scipy.linalg.cho_solve(c2, cov1, check_finite=False)))
    dm = mu1 - mu2
    maha = float(dm @ scipy.linalg.cho_solve(c2, dm, check_finite=False))
    return 0.5 * (trace + maha - d + logdet2 - logdet1)


def _gaussian_local(x, mu, chol, logdet):
    """Density values and Hessians of a fitted Gaussian at query rows."""
    d = mu.shape[0]
    z = x - mu
    sol = scipy.linalg.cho_solve(chol, z.T, check_finite=False).T
    log_p = -0.5 * (d * np.log(2.0 * np.pi) + logdet + np.sum(z * sol, axis=1))
    p = np.exp(log_p)
    inv = scipy.linalg.cho_solve(chol, np.eye(d), check_finite=False)
    hess = p[:, None, None] * (sol[:, :, None] * sol[:, None, :] - inv[None])
    return log_p, p, hess


def gaussian_metric_kl(x1, x2, ratio_floor: float = 1e-6,
                       x1_rows_in_x2=None) -> float:
    """Metric nearest-neighbor KL with Gaussian plug-ins.

    Same pipeline as mised_metric_kl, but the Hessians and the density
    ratio at each anchor come from maximum-likelihood Gaussian fits
    instead of direct non-parametric estimates.
    """
    x1, x2 = _checked_pair(x1, x2)
    mu1, cov1 = _gaussian_moments(x1, "x1")
    mu2, cov2 = _gaussian_moments(x2, "x2")
    c1 = _chol_or_fail(cov1, "x1")
    c2 = _chol_or_fail(cov2, "x2")
    logdet1 = 2.0 * float(np.sum(np.log(np.diag(c1[0]))))
    logdet2 = 2.0 * float(np.sum(np.log(np.diag(c2[0]))))
    logp1, _, h1 = _gaussian_local(x1, mu1, c1, logdet1)
    logp2, _, h2 = _gaussian_local(x1, mu2, c2, logdet2)
    ratios = np.exp(logp2 - logp1)
    metrics = metric_field(x1, x2, h1, h2, ratios, ratio_floor)
    return nn_kl_metric(x1, x2, metrics, x1_rows_in_x2=x1_rows_in_x2)
