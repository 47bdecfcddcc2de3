"""KL divergence between shifted generalized Gaussians, four estimators.

The two densities differ by a mean shift of 2 in the first of five
dimensions; the exact divergence comes from quadrature.  Compares the
plain nearest-neighbor estimator, its Gaussian-metric and learned-metric
corrections, and the parametric Gaussian baseline across tail shapes.
Heavier tails (rho=1) and lighter tails (rho=3) are where the plain
estimator drifts and the metric corrections earn their keep.  A few
minutes of runtime, dominated by the learned-metric fits.
"""

import numpy as np

from mised.experiments import KL_METHODS, kl_trial


def main():
    n, seeds = 1000, 3
    print(f"n={n} per sample, d=5, {seeds} seeds per cell\n")
    header = f"{'rho':>4} {'true':>7}" + "".join(f"{m:>14}" for m in KL_METHODS)
    print(header)
    print("-" * len(header))
    for rho in (1.0, 2.0, 3.0):
        cells = []
        true_kl = None
        for method in KL_METHODS:
            vals = []
            for seed in range(seeds):
                est, true_kl = kl_trial(method, rho, n, seed)
                vals.append(est)
            cells.append(f"{np.mean(vals):+.3f}~{np.std(vals):.2f}")
        print(f"{rho:4.1f} {true_kl:7.4f}" + "".join(f"{c:>14}" for c in cells))
    print("\ncells are mean~std of the estimate; true value from quadrature")


if __name__ == "__main__":
    main()
