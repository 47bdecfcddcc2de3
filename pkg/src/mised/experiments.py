"""Ready-made experiment runs: derivative-recovery benchmarks, divergence
studies on generalized-Gaussian pairs, change detection on synthetic
series, and planted-feature selection problems.  The command line and the
demo scripts are thin wrappers over these."""

import functools

import numpy as np

from .changepoint import ChangeScoreSeries, WindowConfig, change_scores, roc_auc
from .datasets import (
    ChangeSeriesSpec,
    GGParams,
    generate_change_series,
    make_experiment_densities,
    sample_normal,
    normal_derivative_truth,
)
from .derivatives import (
    CvGrid,
    cross_validate_mised,
    fit_mised,
    predict_derivative,
)
from .divergence import (
    MisedMetricConfig,
    gaussian_metric_kl,
    gaussian_parametric_kl,
    mised_metric_kl,
    nn_kl,
)
from .features import forward_select, js_divergence
from .kde import cross_validate_kde, fit_kde, kde_derivative
from .kernels import multi_indices
from .metrics import normalized_mse

KL_METHODS = ("MISED", "NN", "NNG", "GP")
DERIVATIVE_METHODS = ("MISED", "KDE")


def kl_estimator(method: str, seed: int = 0, metric_config=None):
    """Two-sample KL estimator by name; see KL_METHODS.

    MISED is the metric nearest-neighbor estimator driven by direct
    derivative and ratio fits, NN the plain nearest-neighbor one, NNG its
    Gaussian-plug-in variant, GP the closed-form Gaussian baseline.
    """
    method = str(method).upper()
    if method == "MISED":
        cfg = metric_config if metric_config is not None \
            else MisedMetricConfig(seed=seed)
        return functools.partial(mised_metric_kl, config=cfg)
    if method == "NN":
        return nn_kl
    if method == "NNG":
        return gaussian_metric_kl
    if method == "GP":
        def gp(x1, x2, x1_rows_in_x2=None):
            return gaussian_parametric_kl(x1, x2)
        return gp
    raise ValueError(f"unknown method {method!r}; choose from "
                     + ", ".join(KL_METHODS))


def fit_derivative_cv(samples, order: int, grid: CvGrid = None,
                      subset_cap=None, seed: int = 0):
    """Cross-validate (sigma, ridge) and fit the direct estimator."""
    grid = grid if grid is not None else CvGrid(seed=seed)
    sigma, ridge, _ = cross_validate_mised(samples, order, grid, subset_cap)
    return fit_mised(samples, order, sigma, ridge,
                     subset_cap=subset_cap, subset_seed=grid.seed)


def derivative_nmse_trial(n: int, d: int, order: int, seed: int,
                          methods=DERIVATIVE_METHODS) -> dict:
    """Normalized error of derivative estimates on standard-normal data.

    Draws n samples of the d-dimensional standard normal, estimates every
    partial of the given order with each method (hyper-parameters by
    cross-validation), and evaluates against the analytic truth at the
    samples themselves.  Returns {method: normalized mse}.
    """
    samples = sample_normal(n, d, seed)
    indices = multi_indices(order, d)
    truths = np.column_stack(
        [normal_derivative_truth(samples, j) for j in indices])
    grid = CvGrid(seed=seed)
    out = {}
    for method in methods:
        method = str(method).upper()
        if method == "MISED":
            model = fit_derivative_cv(samples, order, grid)
            est = np.column_stack(
                [predict_derivative(model, j, samples) for j in indices])
        elif method == "KDE":
            bandwidth = cross_validate_kde(samples, order, grid)
            kmodel = fit_kde(samples, bandwidth)
            est = np.column_stack(
                [kde_derivative(kmodel, j, samples) for j in indices])
        else:
            raise ValueError(f"unknown method {method!r}; choose from "
                             + ", ".join(DERIVATIVE_METHODS))
        out[method] = normalized_mse(est, truths)
    return out


def kl_trial(method: str, rho: float, n: int, seed: int, d: int = 5,
             metric_config=None):
    """One divergence estimate on the generalized-Gaussian pair.

    Both densities have unit-variance marginals with shape rho and differ
    by a mean shift of 2 in the first coordinate.  Returns
    (estimate, true_kl).
    """
    sampler_a, sampler_b, true_kl = make_experiment_densities(rho, d)
    x1 = sampler_a(n, seed)
    x2 = sampler_b(n, seed + 500003)
    est = kl_estimator(method, seed=seed, metric_config=metric_config)
    return float(est(x1, x2)), true_kl


def three_regime_spec(shift: float = 5.0, duration: int = 300,
                      seed: int = 0) -> ChangeSeriesSpec:
    """Normal / shifted-normal / normal series with two change points."""
    base = GGParams.from_normal(0.0, 1.0)
    moved = GGParams.from_normal(shift, 1.0)
    return ChangeSeriesSpec(
        segments=((base, duration), (moved, duration), (base, duration)),
        seed=seed)


def change_detection_trial(method: str, spec: ChangeSeriesSpec,
                           cfg: WindowConfig, seed: int = 0,
                           metric_config=None) -> ChangeScoreSeries:
    """Score one generated series with the named estimator."""
    series, change_points = generate_change_series(spec)
    est = kl_estimator(method, seed=seed, metric_config=metric_config)
    return change_scores(series, cfg, est, change_points=change_points)


def change_detection_auc(method: str, spec: ChangeSeriesSpec,
                         cfg: WindowConfig, seed: int = 0,
                         metric_config=None) -> float:
    return roc_auc(change_detection_trial(method, spec, cfg, seed=seed,
                                          metric_config=metric_config))


def make_planted_features(n: int, d: int, shift: float, seed: int):
    """Binary-labeled data where exactly one feature carries signal.

    The informative column (position drawn from the seed) is mean-shifted
    between the classes; every other column is standard normal noise.
    Returns (x, y, informative_index).
    """
    if n < 4 or d < 1:
        raise ValueError("need n >= 4 and d >= 1")
    rng = np.random.default_rng(seed)
    informative = int(rng.integers(d))
    y = np.ones(n, dtype=int)
    y[n // 2:] = 2
    x = rng.standard_normal((n, d))
    x[y == 2, informative] += shift
    return x, y, informative


def feature_selection_trial(method: str, n: int, d: int, shift: float,
                            num_features: int, seed: int,
                            metric_config=None):
    """Forward selection on a planted-feature problem.

    Returns (chosen_indices, informative_index, js_scores) where js_scores
    holds the divergence score of each successive chosen prefix.
    """
    x, y, informative = make_planted_features(n, d, shift, seed)
    est = kl_estimator(method, seed=seed, metric_config=metric_config)
    chosen = forward_select(x, y, num_features, est)
    scores = [js_divergence(x[:, chosen[:i + 1]], y, est)
              for i in range(len(chosen))]
    return chosen, informative, scores
