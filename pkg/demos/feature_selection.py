"""Forward feature selection on a planted-signal problem.

Six features, one of which carries a class-conditional mean shift; the
rest are noise.  Greedy selection ranks features by how much each adds to
the divergence between class-conditional densities and the pooled
marginal.  Shows the full selection path with scores for the parametric
Gaussian scorer and the learned-metric one.
"""

from mised.experiments import feature_selection_trial


def main():
    n, d, shift, seed = 400, 6, 2.0, 0
    print(f"n={n}, d={d}, planted shift {shift} on one feature\n")
    for method in ("GP", "MISED"):
        chosen, informative, scores = feature_selection_trial(
            method, n, d, shift, num_features=d, seed=seed)
        print(f"{method}: informative feature is {informative}")
        for rank, (f, s) in enumerate(zip(chosen, scores), start=1):
            tag = "  <- planted" if f == informative else ""
            print(f"  {rank}. feature {f}  score {s:+.4f}{tag}")
        print()
    print("the planted feature should head both lists; the additions after")
    print("it barely move the score (the wiggle is estimator noise)")


if __name__ == "__main__":
    main()
