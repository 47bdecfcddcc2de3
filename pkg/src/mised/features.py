"""Information-theoretic feature scoring and greedy forward selection.

Feature subsets are scored by the Jensen-Shannon-style divergence between
the class-conditional densities and the marginal,

    JS = P(y=1) KL(p(x|y=1) || p(x)) + P(y=2) KL(p(x|y=2) || p(x))

with p(x) represented by the pooled sample and every KL term computed by a
caller-supplied two-sample estimator.  Forward selection grows a feature
set greedily, adding whichever remaining feature lifts this score most.
"""

import inspect

import numpy as np

from .errors import EventCounter

# candidates dropped by forward_select because their score failed
skipped_candidate_events = EventCounter()


def _checked_xy(x, y):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("x must be a non-empty sample matrix")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite values")
    y = np.asarray(y).ravel()
    if y.shape[0] != x.shape[0]:
        raise ValueError("x and y disagree on length")
    values = np.unique(y)
    if values.shape[0] != 2:
        raise ValueError("y must carry exactly two label values")
    masks = [y == v for v in values]
    if any(int(m.sum()) < 2 for m in masks):
        raise ValueError("each class needs at least two samples")
    return x, masks


def js_divergence(x, y, kl_estimator) -> float:
    """Divergence of the two class-conditional densities from the marginal.

    Parameters
    ----------
    x : (n, d) sample matrix.
    y : length-n label vector with exactly two distinct values.
    kl_estimator : callable (x1, x2) -> float.  The marginal is the pooled
        sample, so each class's rows also appear in x2; estimators that
        accept the keyword x1_rows_in_x2 (the nearest-neighbor family
        here) are told which rows those are and switch to their in-sample
        form.  Other callables are invoked plainly.

    Class priors are the empirical label frequencies.  The value is
    unchanged under swapping the two labels.
    """
    x, masks = _checked_xy(x, y)
    n = x.shape[0]
    try:
        params = inspect.signature(kl_estimator).parameters
        takes_rows = "x1_rows_in_x2" in params or any(
            p.kind == p.VAR_KEYWORD for p in params.values())
    except (TypeError, ValueError):
        takes_rows = False
    total = 0.0
    for mask in masks:
        rows = np.nonzero(mask)[0]
        prior = rows.shape[0] / n
        if takes_rows:
            term = kl_estimator(x[rows], x, x1_rows_in_x2=rows)
        else:
            term = kl_estimator(x[rows], x)
        total += prior * float(term)
    return total


def forward_select(x, y, num_features: int, kl_estimator):
    """Greedy forward feature selection by the divergence score.

    Starting from the empty set, repeatedly adds the feature whose
    inclusion maximizes js_divergence on the selected columns; score ties
    go to the lowest feature index.  Candidates whose evaluation raises
    are skipped (counted in skipped_candidate_events); a round where every
    candidate fails raises.

    Returns the list of chosen feature indices, best first.
    """
    x, _ = _checked_xy(x, y)
    d = x.shape[1]
    num_features = int(num_features)
    if not 1 <= num_features <= d:
        raise ValueError("num_features must be in 1..d")

    chosen = []
    remaining = list(range(d))
    for _ in range(num_features):
        best_idx = None
        best_score = -np.inf
        for f in remaining:
            cols = chosen + [f]
            try:
                score = js_divergence(x[:, cols], y, kl_estimator)
            except (ValueError, ArithmeticError, RuntimeError):
                skipped_candidate_events.add()
                continue
            if not np.isfinite(score):
                skipped_candidate_events.add()
                continue
            if score > best_score:
                best_score = score
                best_idx = f
        if best_idx is None:
            raise RuntimeError("every candidate feature failed to score")
        chosen.append(best_idx)
        remaining.remove(best_idx)
    return chosen
