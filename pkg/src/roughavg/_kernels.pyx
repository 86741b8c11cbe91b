# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: pairwise Hoelder sups, Chen triple scans, and
fine-subgrid second-level accumulation.  Same contracts as _kernels_py.py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, pow

cnp.import_array()

BACKEND = "cython"


def reduced_pair_sup(double[:, ::1] values, double[::1] lam, double step, double exponent):
    cdef Py_ssize_t n = values.shape[0] - 1
    cdef Py_ssize_t k = values.shape[1]
    cdef Py_ssize_t g, i, j
    cdef double best = 0.0, acc, diff, dt, denom
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] w = w_arr
    for g in range(1, n + 1):
        dt = g * step
        for j in range(k):
            w[j] = exp(-lam[j] * dt)
        denom = pow(dt, 2.0 * exponent)
        for i in range(n + 1 - g):
            acc = 0.0
            for j in range(k):
                diff = values[i + g, j] - w[j] * values[i, j]
                acc += diff * diff
            acc /= denom
            if acc > best:
                best = acc
    return sqrt(best)


def controlled_remainder_sup(double[:, ::1] y, double[:, :, ::1] yp,
                             double[:, ::1] x, double[::1] lam,
                             double step, double exponent):
    cdef Py_ssize_t n = y.shape[0] - 1
    cdef Py_ssize_t k = y.shape[1]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t g, i, j, l
    cdef double best = 0.0, acc, diff, dt, denom, pred
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dx_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] dx = dx_arr
    for g in range(1, n + 1):
        dt = g * step
        for j in range(k):
            w[j] = exp(-lam[j] * dt)
        denom = pow(dt, 2.0 * exponent)
        for i in range(n + 1 - g):
            for l in range(d):
                dx[l] = x[i + g, l] - x[i, l]
            acc = 0.0
            for j in range(k):
                pred = y[i, j]
                for l in range(d):
                    pred += yp[i, l, j] * dx[l]
                diff = y[i + g, j] - w[j] * pred
                acc += diff * diff
            acc /= denom
            if acc > best:
                best = acc
    return sqrt(best)


def chen_max_residual(double[:, ::1] first, double[:, :, ::1] second):
    cdef Py_ssize_t n = second.shape[0]
    cdef Py_ssize_t d = second.shape[1]
    cdef Py_ssize_t i, j, s, u, t, a, b
    cdef double best = 0.0, res, acc
    cdef cnp.ndarray[cnp.float64_t, ndim=4] tab_arr = np.zeros((n + 1, n + 1, d, d))
    cdef double[:, :, :, ::1] table = tab_arr
    # rebuild all second-level values by the consecutive-interval recursion
    for i in range(n):
        for a in range(d):
            for b in range(d):
                table[i, i + 1, a, b] = second[i, a, b]
        for j in range(i + 1, n):
            for a in range(d):
                for b in range(d):
                    table[i, j + 1, a, b] = (table[i, j, a, b] + second[j, a, b]
                                             + (first[j, a] - first[i, a])
                                             * (first[j + 1, b] - first[j, b]))
    for u in range(1, n):
        for s in range(u):
            for t in range(u + 1, n + 1):
                acc = 0.0
                for a in range(d):
                    for b in range(d):
                        res = (table[s, t, a, b] - table[u, t, a, b] - table[s, u, a, b]
                               - (first[u, a] - first[s, a]) * (first[t, b] - first[u, b]))
                        res = fabs(res)
                        if res > acc:
                            acc = res
                if acc > best:
                    best = acc
    return best


def second_level_sums(double[:, :, ::1] da, double[:, :, ::1] db, bint trapezoid):
    cdef Py_ssize_t n = da.shape[0]
    cdef Py_ssize_t f = da.shape[1]
    cdef Py_ssize_t ka = da.shape[2]
    cdef Py_ssize_t kb = db.shape[2]
    cdef Py_ssize_t i, j, a, b
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out_arr = np.zeros((n, ka, kb))
    cdef double[:, :, ::1] out = out_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pref_arr = np.empty(ka, dtype=np.float64)
    cdef double[::1] pref = pref_arr
    cdef double point
    for i in range(n):
        for a in range(ka):
            pref[a] = 0.0
        for j in range(f):
            for a in range(ka):
                point = pref[a]
                if trapezoid:
                    point += 0.5 * da[i, j, a]
                for b in range(kb):
                    out[i, a, b] += point * db[i, j, b]
            for a in range(ka):
                pref[a] += da[i, j, a]
    return out_arr
