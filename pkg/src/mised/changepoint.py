"""Change-point scoring of scalar series by two-sample divergence.

A scalar series is turned into delay vectors y(t) = (s_t, ..., s_{t+m-1})
and consecutive groups of r such vectors form the sample sets

    Y(t) = {y(t), ..., y(t+r-1)}          (r rows, m columns)

The change score at t is the estimated KL divergence between Y(t) and the
non-overlapping group Y(t+r+m); a change between the two groups makes
their underlying densities differ, so score peaks flag changes.  The score
computed at t refers to detection time t+r+m, the first index the later
group touches.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .metrics import binary_auc


@dataclass(frozen=True)
class WindowConfig:
    """Delay embedding layout: r vectors per sample set, m dimensions each."""

    r: int = 3
    m: int = 100

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise ValueError("r and m must be at least 1")

    @property
    def span(self) -> int:
        """Series indices consumed by one pair of sample sets."""
        return 2 * (self.r + self.m)


def embed_windows(series, cfg: WindowConfig):
    """All (Y(t), Y(t+r+m)) sample-set pairs of a series.

    Returns a list of (r, m) matrix pairs, one per t starting at 0.  The
    series must be long enough for at least one pair.
    """
    s = np.asarray(series, dtype=float).ravel()
    if not np.all(np.isfinite(s)):
        raise ValueError("series contains non-finite values")
    n = s.shape[0]
    if n < cfg.span:
        raise ValueError(f"series too short: need at least {cfg.span} points")
    windows = np.lib.stride_tricks.sliding_window_view(s, cfg.m)
    gap = cfg.r + cfg.m
    out = []
    for t in range(n - cfg.span + 1):
        out.append((windows[t:t + cfg.r].copy(),
                    windows[t + gap:t + gap + cfg.r].copy()))
    return out


@dataclass
class ChangeScoreSeries:
    """Divergence scores aligned to detection times, plus the ground truth
    needed to judge them: true change indices and the tolerance window w
    within which a detection counts as correct."""

    times: np.ndarray
    scores: np.ndarray
    change_points: np.ndarray
    tolerance: int

    def labels(self) -> np.ndarray:
        """True where a detection time lies within the tolerance of some
        true change point."""
        if len(self.change_points) == 0:
            return np.zeros(self.times.shape[0], dtype=bool)
        gaps = np.abs(self.times[:, None] - np.asarray(self.change_points)[None, :])
        return gaps.min(axis=1) <= self.tolerance

    def to_csv(self, path: str):
        labels = self.labels()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "score", "is_true_change"])
            for t, score, lab in zip(self.times, self.scores, labels):
                writer.writerow([int(t), repr(float(score)), int(lab)])


def change_scores(series, cfg: WindowConfig, estimator,
                  change_points=(), tolerance=None) -> ChangeScoreSeries:
    """Score every valid offset of a series with a two-sample estimator.

    estimator maps (x1, x2) to a divergence value.  Estimator failures do
    not abort the sweep; the affected scores come back as NaN and are
    dropped by roc_auc.  tolerance defaults to r + m.
    """
    pairs = embed_windows(series, cfg)
    gap = cfg.r + cfg.m
    scores = np.empty(len(pairs))
    for t, (left, right) in enumerate(pairs):
        try:
            scores[t] = estimator(left, right)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError):
            scores[t] = np.nan
    times = np.arange(len(pairs)) + gap
    tol = int(tolerance) if tolerance is not None else gap
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return ChangeScoreSeries(times=times, scores=scores,
                             change_points=np.asarray(change_points, dtype=int),
                             tolerance=tol)


def roc_auc(score_series: ChangeScoreSeries) -> float:
    """Area under the ROC curve of change scores.

    Detection times within the tolerance window of a true change are the
    positive class.  NaN scores (failed estimates) are excluded.  Both
    classes must be non-empty after exclusion.
    """
    keep = np.isfinite(score_series.scores)
    return binary_auc(score_series.scores[keep], score_series.labels()[keep])
