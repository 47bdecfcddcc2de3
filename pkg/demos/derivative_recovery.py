"""Recovering density derivatives of a 1-D standard normal.

Fits the direct kernel-model estimator and the KDE-derivative baseline on
the same draws, both with cross-validated hyper-parameters, then compares
them against the analytic derivative along a grid and by normalized MSE.
Takes about a minute.
"""

import numpy as np

from mised.datasets import normal_derivative_truth, sample_normal
from mised.derivatives import CvGrid, cross_validate_mised, fit_mised, predict_derivative
from mised.kde import cross_validate_kde, fit_kde, kde_derivative
from mised.metrics import normalized_mse


def sketch(values, width=46):
    lo, hi = float(np.min(values)), float(np.max(values))
    span = (hi - lo) or 1.0
    out = []
    for v in values:
        pos = int((v - lo) / span * (width - 1))
        out.append(" " * pos + "*")
    return out, lo, hi


def main():
    n, order, seed = 500, 2, 0
    samples = sample_normal(n, 1, seed)
    j = (order,)

    sigma, ridge, _ = cross_validate_mised(samples, order, CvGrid(seed=seed))
    model = fit_mised(samples, order, sigma, ridge)
    print(f"direct fit: sigma={sigma:.3f} ridge={ridge:.3f}")

    bandwidth = cross_validate_kde(samples, order, CvGrid(seed=seed))
    kde = fit_kde(samples, bandwidth)
    print(f"kde fit:    bandwidth={bandwidth:.3f}")

    grid = np.linspace(-3.0, 3.0, 25)[:, None]
    truth = normal_derivative_truth(grid, j)
    direct = predict_derivative(model, j, grid)
    lines, lo, hi = sketch(truth)
    print(f"\nsecond derivative along [-3, 3]  (*: truth, range {lo:.3f}..{hi:.3f})")
    for x, line, est in zip(grid.ravel(), lines, direct):
        print(f"  {x:+.2f} |{line:<46}| est {est:+.3f}")

    # errors at the sample points, the footnote-style normalized MSE
    t = normal_derivative_truth(samples, j)
    e_direct = predict_derivative(model, j, samples)
    e_kde = kde_derivative(kde, j, samples)
    print(f"\nnormalized MSE at the samples (n={n}, k={order}):")
    print(f"  direct model  {normalized_mse(e_direct, t):.4f}")
    print(f"  kde baseline  {normalized_mse(e_kde, t):.4f}")


if __name__ == "__main__":
    main()
