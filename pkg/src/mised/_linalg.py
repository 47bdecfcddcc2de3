"""Regularized symmetric solves with a residual certificate."""

import numpy as np
import scipy.linalg

from .errors import NumericalError

# relative residual every solve must satisfy before a solution is returned
RESIDUAL_RTOL = 1e-8


def solve_regularized(mat: np.ndarray, rhs: np.ndarray, context: str = "solve"):
    """Solve mat @ x = rhs for a symmetric positive semi-definite system.

    Tries a Cholesky factorization first and falls back to a pivoted LU
    when the matrix is not numerically positive definite.  A few rounds of
    iterative refinement push the residual below RESIDUAL_RTOL relative to
    each right-hand-side column; failing that is treated as a numerical
    failure rather than silently returning a sloppy solution.

    rhs may be a vector or a matrix of columns.  Zero columns map to exact
    zero solutions.
    """
    mat = np.asarray(mat, dtype=float)
    one_col = rhs.ndim == 1
    b = rhs[:, None] if one_col else np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(mat)) or not np.all(np.isfinite(b)):
        raise NumericalError(f"{context}: non-finite system")

    try:
        factor = scipy.linalg.cho_factor(mat, check_finite=False)
        def apply(v):
            return scipy.linalg.cho_solve(factor, v, check_finite=False)
    except scipy.linalg.LinAlgError:
        # not numerically SPD, e.g. ridge 0 with duplicate centers
        lu = scipy.linalg.lu_factor(mat, check_finite=False)
        def apply(v):
            return scipy.linalg.lu_solve(lu, v, check_finite=False)

    norms = np.linalg.norm(b, axis=0)
    x = np.zeros_like(b)
    live = norms > 0.0
    if np.any(live):
        x[:, live] = apply(b[:, live])
        for _ in range(4):
            resid = b[:, live] - mat @ x[:, live]
            if np.all(np.linalg.norm(resid, axis=0) <= RESIDUAL_RTOL * norms[live]):
                break
            x[:, live] += apply(resid)

    if not np.all(np.isfinite(x)):
        raise NumericalError(
            f"{context}: singular system; a ridge penalty > 0 is required"
        )
    resid = np.linalg.norm(b - mat @ x, axis=0)
    if np.any(resid > RESIDUAL_RTOL * np.maximum(norms, np.finfo(float).tiny)):
        raise NumericalError(
            f"{context}: residual certificate failed; the system is too "
            "ill-conditioned, increase the ridge penalty"
        )
    return x[:, 0] if one_col else x
