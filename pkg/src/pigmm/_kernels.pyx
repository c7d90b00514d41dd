"""Compiled inner loops for Gaussian log-densities and row-wise log-sum-exp."""
import numpy as np

from libc.math cimport exp, log, INFINITY

cdef double LOG_2PI = 1.8378770664093453


def component_logpdf(const double[:, ::1] X, const double[::1] mean,
                     const double[:, ::1] chol, double log_det):
    """Log-density of every row of ``X`` under N(mean, L L^T)."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, maha
    out_arr = np.empty(n, dtype=np.float64)
    z_arr = np.empty(d, dtype=np.float64)
    inv_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] z = z_arr
    cdef double[::1] inv_diag = inv_arr
    cdef double const_term = d * LOG_2PI + log_det
    for j in range(d):
        inv_diag[j] = 1.0 / chol[j, j]
    for i in range(n):
        maha = 0.0
        for j in range(d):
            acc = X[i, j] - mean[j]
            for k in range(j):
                acc -= chol[j, k] * z[k]
            acc *= inv_diag[j]
            z[j] = acc
            maha += acc * acc
        out[i] = -0.5 * (const_term + maha)
    return out_arr


def logsumexp_rows(const double[:, ::1] A):
    """log(sum(exp(A), axis=1)) with the max shifted out."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t m = A.shape[1]
    cdef Py_ssize_t i, j
    cdef double mx, s
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        mx = -INFINITY
        for j in range(m):
            if A[i, j] > mx:
                mx = A[i, j]
        if mx == -INFINITY:
            out[i] = -INFINITY
            continue
        s = 0.0
        for j in range(m):
            s += exp(A[i, j] - mx)
        out[i] = mx + log(s)
    return out_arr


def normalize_log_rows(const double[:, ::1] A):
    """Return (exp(A - lse), lse) where lse is the row-wise log-sum-exp."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t m = A.shape[1]
    cdef Py_ssize_t i, j
    lse_arr = logsumexp_rows(A)
    resp_arr = np.empty((n, m), dtype=np.float64)
    cdef double[::1] lse = lse_arr
    cdef double[:, ::1] resp = resp_arr
    for i in range(n):
        for j in range(m):
            resp[i, j] = exp(A[i, j] - lse[i])
    return resp_arr, lse_arr
