"""Pure-NumPy implementations of the hot kernels.

Mirrors ``_kernels.pyx``; the dispatcher in ``kernels.py`` picks the compiled
version when it is importable.  All routines assume uniform grids (constant
step), float64 C-contiguous inputs, and vectorize over one gap at a time so
memory stays O(n) per gap.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def reduced_pair_sup(values, lam, step, exponent):
    """sup over grid pairs i<j of |v_j - S_(j-i) v_i| / ((j-i) step)^exponent.

    ``values``: (n+1, K); ``lam``: (K,) mode decay rates (zeros give the plain
    increment seminorm).  Norm on K is Euclidean.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    n = values.shape[0] - 1
    best = 0.0
    for g in range(1, n + 1):
        dt = g * step
        w = np.exp(-lam * dt)
        diff = values[g:] - w * values[:-g]
        sq = np.einsum("ik,ik->i", diff, diff)
        cand = float(sq.max()) / dt ** (2.0 * exponent)
        if cand > best:
            best = cand
    return float(np.sqrt(best))


def controlled_remainder_sup(y, yp, x, lam, step, exponent):
    """sup over pairs of |y_j - S_(j-i)(y_i + yp_i . (x_j - x_i))| / dt^exponent.

    ``y``: (n+1, K), ``yp``: (n+1, D, K), ``x``: (n+1, D), ``lam``: (K,).
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    yp = np.ascontiguousarray(yp, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    n = y.shape[0] - 1
    best = 0.0
    for g in range(1, n + 1):
        dt = g * step
        w = np.exp(-lam * dt)
        dx = x[g:] - x[:-g]
        pred = y[:-g] + np.einsum("idk,id->ik", yp[:-g], dx)
        diff = y[g:] - w * pred
        sq = np.einsum("ik,ik->i", diff, diff)
        cand = float(sq.max()) / dt ** (2.0 * exponent)
        if cand > best:
            best = cand
    return float(np.sqrt(best))


def chen_max_residual(first, second):
    """Max Chen residual over every grid triple s < u < t.

    Second-level values over non-consecutive intervals are rebuilt by the
    consecutive-interval recursion (left-to-right accumulation), so the
    returned number reflects genuine floating-point drift of the stored
    blocks, not an algebraically cancelled expression.
    """
    first = np.ascontiguousarray(first, dtype=np.float64)
    second = np.ascontiguousarray(second, dtype=np.float64)
    n, d = second.shape[0], second.shape[1]
    table = np.zeros((n + 1, n + 1, d, d))
    for i in range(n):
        delta = first[i + 1:] - first[i:-1]          # consecutive increments
        pref = first[i:n] - first[i]                 # increments from anchor i
        blocks = second[i:] + pref[:, :, None] * delta[:, None, :]
        np.cumsum(blocks, axis=0, out=table[i, i + 1:])
    best = 0.0
    for u in range(1, n):
        t_ts = table[:u, u + 1:]
        t_tu = table[u, u + 1:]
        t_us = table[:u, u]
        dxu = first[u] - first[:u]                   # increment over [s, u]
        dxt = first[u + 1:] - first[u]               # increment over [u, t]
        cross = dxu[:, None, :, None] * dxt[None, :, None, :]
        res = t_ts - t_tu[None, :] - t_us[:, None] - cross
        cand = float(np.abs(res).max())
        if cand > best:
            best = cand
    return best


def second_level_sums(da, db, trapezoid):
    """Per-interval second level from fine-subgrid increments.

    ``da``, ``db``: (n, f, Da), (n, f, Db) fine increments of the two paths.
    Left-point mode accumulates ``sum_k prefix(a)_k (x) db_k``; trapezoid mode
    shifts the prefix by half an increment (only meaningful for da is db).
    """
    da = np.ascontiguousarray(da, dtype=np.float64)
    db = np.ascontiguousarray(db, dtype=np.float64)
    pref = np.cumsum(da, axis=1) - da
    if trapezoid:
        pref = pref + 0.5 * da
    return np.einsum("nfa,nfb->nab", pref, db)
