"""Gaussian kernel evaluations, exact partial derivatives, Gram integrals.

Everything in this module is closed form.  The kernel is the unnormalized
bump psi_c(x) = exp(-||x - c||^2 / (2 sigma^2)).  Its partial derivatives
factorize over dimensions, and each one-dimensional factor is a
probabilists' Hermite polynomial times the bump itself:

    d^n/dt^n exp(-u^2/2) = (-1)^n He_n(u) exp(-u^2/2),   u = (t - c)/sigma

so a partial of total order k costs O(k) per dimension.  Integrals of
kernel products over R^d (the Gram matrix, and cross products of kernel
derivatives) also come out in closed form via the same polynomials.
"""

from math import comb

import numpy as np


def multi_indices(order: int, dim: int):
    """All derivative multi-indices of the given total order.

    Parameters
    ----------
    order : total derivative order k >= 0.
    dim : number of dimensions d >= 1.

    Returns
    -------
    list of tuples (j_1, ..., j_d) with sum j_m = order, in descending
    lexicographic order.  The list has C(order + dim - 1, dim - 1) entries.
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if order < 0:
        raise ValueError("order must be non-negative")
    if dim == 1:
        return [(order,)]
    out = []
    for head in range(order, -1, -1):
        out.extend((head,) + tail for tail in multi_indices(order - head, dim - 1))
    return out


def multi_index_count(order: int, dim: int) -> int:
    """Number of multi-indices of a given total order in d dimensions."""
    return comb(order + dim - 1, dim - 1)


def check_multi_index(j, dim: int):
    """Validate a multi-index against a dimension; returns it as a tuple."""
    j = tuple(int(v) for v in j)
    if len(j) != dim:
        raise ValueError(f"multi-index has {len(j)} entries, expected {dim}")
    if any(v < 0 for v in j):
        raise ValueError("multi-index entries must be non-negative")
    return j


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError("sigma must be positive and finite")
    return sigma


def _rows(x, name: str):
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix of sample rows")
    if a.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def hermite_table(u: np.ndarray, max_order: int):
    """Probabilists' Hermite polynomials He_0..He_max evaluated at u.

    Uses the recurrence He_{n+1}(u) = u He_n(u) - n He_{n-1}(u).
    Returns a list of arrays shaped like u.
    """
    out = [np.ones_like(u)]
    if max_order >= 1:
        out.append(u.copy())
    for n in range(2, max_order + 1):
        out.append(u * out[n - 1] - (n - 1) * out[n - 2])
    return out


def kernel_matrix(x, centers, sigma: float) -> np.ndarray:
    """Kernel values psi_c(x) for every query row against every center row."""
    x = _rows(x, "x")
    centers = _rows(centers, "centers")
    sigma = _check_sigma(sigma)
    if x.shape[1] != centers.shape[1]:
        raise ValueError("x and centers disagree on dimension")
    diff = x[:, None, :] - centers[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return np.exp(-0.5 * sq / sigma**2)


def partial_matrices(x, centers, sigma: float, indices):
    """Partial derivatives of the kernel, for a batch of multi-indices.

    For each multi-index j in `indices`, computes the matrix with entry
    (i, l) equal to the order-|j| partial of psi_{centers[l]} evaluated at
    x[i], differentiated with respect to the evaluation point.  Sharing the
    base kernel and the per-dimension Hermite tables across the batch is
    what keeps repeated calls cheap during cross-validation.

    Returns a dict mapping each multi-index tuple to an (n_x, n_centers)
    array.
    """
    x = _rows(x, "x")
    centers = _rows(centers, "centers")
    sigma = _check_sigma(sigma)
    d = x.shape[1]
    if centers.shape[1] != d:
        raise ValueError("x and centers disagree on dimension")
    indices = [check_multi_index(j, d) for j in indices]

    u = [(x[:, m, None] - centers[None, :, m]) / sigma for m in range(d)]
    sq = u[0] ** 2
    for m in range(1, d):
        sq = sq + u[m] ** 2
    base = np.exp(-0.5 * sq)

    max_per_dim = [max((j[m] for j in indices), default=0) for m in range(d)]
    tables = [hermite_table(u[m], max_per_dim[m]) for m in range(d)]

    out = {}
    for j in indices:
        k = sum(j)
        arr = base
        for m in range(d):
            if j[m] > 0:
                arr = arr * tables[m][j[m]]
        if k > 0:
            arr = arr * ((-1.0) ** k * sigma ** (-k))
        elif arr is base:
            arr = base.copy()
        out[j] = arr
    return out


def partial_matrix(x, centers, sigma: float, j) -> np.ndarray:
    """Matrix of one kernel partial derivative; see partial_matrices."""
    d = _rows(x, "x").shape[1]
    j = check_multi_index(j, d)
    return partial_matrices(x, centers, sigma, [j])[j]


def gauss_kernel(x, c, sigma: float) -> float:
    """Kernel value exp(-||x - c||^2 / (2 sigma^2)) for single points."""
    return float(kernel_matrix(np.atleast_1d(x), np.atleast_1d(c), sigma)[0, 0])


def gauss_kernel_partial(x, c, sigma: float, j) -> float:
    """Exact partial derivative of the kernel at a single point.

    Parameters
    ----------
    x, c : evaluation point and kernel center, d-vectors.
    sigma : kernel width, > 0.
    j : multi-index (j_1, ..., j_d) of per-dimension derivative orders.

    Returns
    -------
    The order-|j| mixed partial of psi_c at x, differentiated in x.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j = check_multi_index(j, x.shape[-1])
    return float(partial_matrix(x, np.atleast_1d(c), sigma, j)[0, 0])


def gram_matrix(centers, sigma: float) -> np.ndarray:
    """Pairwise integrals of kernel products over all of R^d.

    Entry (i, l) is int psi_i(x) psi_l(x) dx
    = (pi sigma^2)^{d/2} exp(-||c_i - c_l||^2 / (4 sigma^2)).
    """
    centers = _rows(centers, "centers")
    sigma = _check_sigma(sigma)
    d = centers.shape[1]
    diff = centers[:, None, :] - centers[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    return (np.pi * sigma**2) ** (d / 2.0) * np.exp(-0.25 * sq / sigma**2)


def gram_entry(ci, cj, sigma: float) -> float:
    """Single Gram integral int psi_i psi_j dx for two centers."""
    ci = np.atleast_1d(np.asarray(ci, dtype=float))
    cj = np.atleast_1d(np.asarray(cj, dtype=float))
    if ci.shape != cj.shape:
        raise ValueError("centers disagree on dimension")
    sigma = _check_sigma(sigma)
    if not (np.all(np.isfinite(ci)) and np.all(np.isfinite(cj))):
        raise ValueError("centers contain non-finite values")
    d = ci.shape[0]
    sq = float(np.dot(ci - cj, ci - cj))
    return (np.pi * sigma**2) ** (d / 2.0) * np.exp(-0.25 * sq / sigma**2)


def h_vectors(centers, samples, sigma: float, indices):
    """Sample averages of kernel partials, one vector per multi-index.

    Entry l of the vector for multi-index j is the average over samples
    x_i of the j-partial of psi_{centers[l]} evaluated at x_i.  These are
    the linear-term vectors of the derivative-fitting objective.
    """
    phi = partial_matrices(samples, centers, sigma, indices)
    return {j: phi[j].mean(axis=0) for j in phi}


def h_vector(centers, samples, sigma: float, j) -> np.ndarray:
    """Single sample-average vector of kernel partials; see h_vectors."""
    d = _rows(centers, "centers").shape[1]
    j = check_multi_index(j, d)
    return h_vectors(centers, samples, sigma, [j])[j]


def deriv_overlap_matrix(centers_a, centers_b, sigma: float, j) -> np.ndarray:
    """Integrals of products of equal-order kernel derivatives.

    Entry (i, l) is int D^j psi_{a_i}(x) D^j psi_{b_l}(x) dx over R^d.
    Closed form per dimension, with v = (a_m - b_m) / (sqrt(2) sigma):

        (-1)^{j_m} sqrt(pi) sigma (2 sigma^2)^{-j_m} He_{2 j_m}(v) e^{-v^2/2}

    Used for exact squared-norm terms of mixture-derivative estimators.
    """
    a = _rows(centers_a, "centers_a")
    b = _rows(centers_b, "centers_b")
    sigma = _check_sigma(sigma)
    d = a.shape[1]
    if b.shape[1] != d:
        raise ValueError("center sets disagree on dimension")
    j = check_multi_index(j, d)
    k = sum(j)

    out = None
    for m in range(d):
        v = (a[:, m, None] - b[None, :, m]) / (np.sqrt(2.0) * sigma)
        fac = np.exp(-0.5 * v**2)
        if j[m] > 0:
            fac = fac * hermite_table(v, 2 * j[m])[2 * j[m]]
        out = fac if out is None else out * fac
    scale = (np.pi * sigma**2) ** (d / 2.0) * (-1.0) ** k * (2.0 * sigma**2) ** (-k)
    return scale * out


def subsample_rows(x, cap, seed: int = 0) -> np.ndarray:
    """Uniform-random row subset of size cap (all rows if cap is None
    or not smaller than the row count).  Deterministic in the seed."""
    x = _rows(x, "x")
    if cap is None or cap >= x.shape[0]:
        return x
    if cap < 1:
        raise ValueError("cap must be at least 1")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(x.shape[0], size=cap, replace=False))
    return x[idx]
