# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernels. Same contract as ``mied._kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, sqrt, INFINITY

cnp.import_array()


cdef inline double _log_phi_sq(double d2, int code, double s, double eps) noexcept nogil:
    cdef double e2 = eps * eps
    cdef double big, small
    if code == 0:
        if d2 > e2:
            big = d2
            small = e2
        else:
            big = e2
            small = d2
        return -0.5 * s * (log(big) + log1p(small / big))
    if code == 1:
        return -d2 / (2.0 * e2)
    return -sqrt(d2) / eps


cdef inline double _grad_coef(double d2, int code, double s, double eps) noexcept nogil:
    cdef double r
    if code == 0:
        return -s / (d2 + eps * eps)
    if code == 1:
        return -1.0 / (eps * eps)
    r = sqrt(d2)
    if r > 0:
        return -1.0 / (eps * r)
    return 0.0


cdef void _fill_exponents(const double[:, ::1] X, const double[::1] logp, int code,
                          double s, double eps, const double[::1] diag_sq, bint has_diag,
                          double[:, ::1] A, double[:, ::1] D2) noexcept nogil:
    cdef Py_ssize_t N = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double d2, t, a
    for i in range(N):
        if has_diag:
            A[i, i] = _log_phi_sq(diag_sq[i], code, s, eps) - logp[i]
        else:
            A[i, i] = -INFINITY
        D2[i, i] = 0.0
        for j in range(i + 1, N):
            d2 = 0.0
            for k in range(n):
                t = X[i, k] - X[j, k]
                d2 += t * t
            a = _log_phi_sq(d2, code, s, eps) - 0.5 * logp[i] - 0.5 * logp[j]
            A[i, j] = a
            A[j, i] = a
            D2[i, j] = d2
            D2[j, i] = d2


def nn_dists(X):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t N = Xv.shape[0], n = Xv.shape[1]
    out = np.full(N, np.inf)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double d2, t
    with nogil:
        for i in range(N):
            for j in range(i + 1, N):
                d2 = 0.0
                for k in range(n):
                    t = Xv[i, k] - Xv[j, k]
                    d2 += t * t
                if d2 < o[i]:
                    o[i] = d2
                if d2 < o[j]:
                    o[j] = d2
        for i in range(N):
            o[i] = sqrt(o[i])
    return out


def pair_exponents(X, logp, int code, double s, double eps, diag_sq):
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    N = Xc.shape[0]
    lp = np.ascontiguousarray(logp, dtype=np.float64)
    has_diag = diag_sq is not None
    dg = np.ascontiguousarray(diag_sq if has_diag else np.zeros(N), dtype=np.float64)
    A = np.empty((N, N))
    D2 = np.empty((N, N))
    _fill_exponents(Xc, lp, code, s, eps, dg, has_diag, A, D2)
    return A


def log_sum_and_grad(X, logp, grad_logp, int code, double s, double eps, diag_sq):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] G = np.ascontiguousarray(grad_logp, dtype=np.float64)
    cdef const double[::1] lp = np.ascontiguousarray(logp, dtype=np.float64)
    cdef Py_ssize_t N = Xv.shape[0], n = Xv.shape[1]
    cdef bint has_diag = diag_sq is not None
    cdef const double[::1] dg = np.ascontiguousarray(
        diag_sq if has_diag else np.zeros(N), dtype=np.float64)
    A_arr = np.empty((N, N))
    D2_arr = np.empty((N, N))
    grad_arr = np.zeros((N, n))
    cdef double[:, ::1] A = A_arr
    cdef double[:, ::1] D2 = D2_arr
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t i, j, k
    cdef double amax = -INFINITY, total = 0.0, row, e, c, w
    with nogil:
        _fill_exponents(Xv, lp, code, s, eps, dg, has_diag, A, D2)
        for i in range(N):
            for j in range(N):
                if A[i, j] > amax:
                    amax = A[i, j]
        # fixed i-then-j order keeps the reduction deterministic
        for i in range(N):
            row = 0.0
            for j in range(N):
                e = exp(A[i, j] - amax)
                row += e
                if j != i:
                    w = 2.0 * e * _grad_coef(D2[i, j], code, s, eps)
                    for k in range(n):
                        grad[i, k] += w * (Xv[i, k] - Xv[j, k])
            for k in range(n):
                grad[i, k] -= row * G[i, k]
            total += row
        for i in range(N):
            for k in range(n):
                grad[i, k] /= total
    return amax + log(total), grad_arr
