"""Pure-numpy pairwise kernels (fallback when the compiled module is absent).

Family codes: 0 Riesz, 1 Gaussian, 2 Laplace. ``diag_sq`` holds the squared
distance at which each diagonal term is evaluated; ``None`` drops the
diagonal entirely.
"""

import numpy as np


def _pair_sq(X):
    diff = X[:, None, :] - X[None, :, :]
    return diff, np.einsum("ijk,ijk->ij", diff, diff)


def _log_phi_sq(d2, code, s, eps):
    e2 = eps * eps
    if code == 0:
        big = np.maximum(d2, e2)
        small = np.minimum(d2, e2)
        return -0.5 * s * (np.log(big) + np.log1p(small / big))
    if code == 1:
        return -d2 / (2.0 * e2)
    return -np.sqrt(d2) / eps


def _grad_coef(d2, code, s, eps):
    """c(d2) such that grad log phi(diff) = c * diff."""
    if code == 0:
        return -s / (d2 + eps * eps)
    if code == 1:
        return np.full_like(d2, -1.0 / (eps * eps))
    r = np.sqrt(d2)
    out = np.zeros_like(d2)
    nz = r > 0
    out[nz] = -1.0 / (eps * r[nz])
    return out


def nn_dists(X):
    X = np.ascontiguousarray(X, dtype=float)
    _, d2 = _pair_sq(X)
    np.fill_diagonal(d2, np.inf)
    return np.sqrt(d2.min(axis=1))


def pair_exponents(X, logp, code, s, eps, diag_sq):
    X = np.ascontiguousarray(X, dtype=float)
    _, d2 = _pair_sq(X)
    half = 0.5 * np.asarray(logp, dtype=float)
    A = _log_phi_sq(d2, code, s, eps) - half[:, None] - half[None, :]
    idx = np.arange(X.shape[0])
    if diag_sq is None:
        A[idx, idx] = -np.inf
    else:
        A[idx, idx] = _log_phi_sq(np.asarray(diag_sq, dtype=float), code, s, eps) - 2.0 * half
    return A


def log_sum_and_grad(X, logp, grad_logp, code, s, eps, diag_sq):
    """Return (logsumexp of pair exponents, gradient w.r.t. X)."""
    X = np.ascontiguousarray(X, dtype=float)
    N = X.shape[0]
    diff, d2 = _pair_sq(X)
    half = 0.5 * np.asarray(logp, dtype=float)
    A = _log_phi_sq(d2, code, s, eps) - half[:, None] - half[None, :]
    idx = np.arange(N)
    if diag_sq is None:
        A[idx, idx] = -np.inf
    else:
        A[idx, idx] = _log_phi_sq(np.asarray(diag_sq, dtype=float), code, s, eps) - 2.0 * half
    amax = A.max()
    E = np.exp(A - amax)
    total = E.sum()
    row = E.sum(axis=1)
    C = _grad_coef(d2, code, s, eps)
    M = E * C
    M[idx, idx] = 0.0
    grad = 2.0 * np.einsum("ij,ijk->ik", M, diff) - row[:, None] * grad_logp
    return amax + np.log(total), grad / total
