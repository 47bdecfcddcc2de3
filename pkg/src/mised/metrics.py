"""Evaluation helpers: scale-free estimation error and ranking quality."""

import numpy as np


def normalized_mse(estimates, truths) -> float:
    """Mean squared error normalized by the geometric mean of the two
    second moments.

    Inputs are values at evaluation points, one column per estimated
    component (a single vector works too).  The statistic is

        mean||e - t||^2 / sqrt(mean||e||^2 * mean||t||^2)

    with means over points and norms over components, so rescaling both
    inputs by a common factor changes nothing.  A vanishing denominator
    (either input identically zero) is an error.
    """
    e = np.asarray(estimates, dtype=float)
    t = np.asarray(truths, dtype=float)
    if e.shape != t.shape:
        raise ValueError("estimates and truths disagree on shape")
    if e.ndim == 1:
        e = e[:, None]
        t = t[:, None]
    if e.ndim != 2 or e.shape[0] == 0:
        raise ValueError("expected a non-empty vector or matrix of values")
    if not (np.all(np.isfinite(e)) and np.all(np.isfinite(t))):
        raise ValueError("inputs contain non-finite values")
    num = float(np.mean(np.sum((e - t) ** 2, axis=1)))
    den = np.sqrt(float(np.mean(np.sum(e**2, axis=1)))
                  * float(np.mean(np.sum(t**2, axis=1))))
    if den == 0.0:
        raise ValueError("normalization is zero; inputs must not vanish")
    return num / den


def binary_auc(scores, labels) -> float:
    """Area under the ROC curve of scores against binary labels.

    Thresholds sweep the distinct score values from high to low; tied
    scores move as one block, and the area is the trapezoidal integral of
    the resulting (false-positive rate, true-positive rate) polyline.
    Negating all scores yields exactly one minus the area.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be matching vectors")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite values")
    y = y.astype(bool)
    n_pos = int(y.sum())
    n_neg = int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")
    order = np.argsort(-s, kind="stable")
    s = s[order]
    y = y[order]
    # one ROC vertex per distinct score value
    block_ends = np.nonzero(np.diff(s))[0]
    ends = np.concatenate([block_ends, [s.shape[0] - 1]])
    tp = np.cumsum(y)[ends]
    fp = np.cumsum(~y)[ends]
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    return float(np.sum(0.5 * (tpr[1:] + tpr[:-1]) * (fpr[1:] - fpr[:-1])))
