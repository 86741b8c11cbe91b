"""Kernel dispatch: compiled extension when available, NumPy otherwise.

Set ``ROUGHAVG_PURE=1`` to force the NumPy implementations (used by the
benchmark and by tests that compare the two backends).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

if os.environ.get("ROUGHAVG_PURE"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND


def _c64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def reduced_pair_sup(values, lam, step, exponent):
    return float(_impl.reduced_pair_sup(_c64(values), _c64(lam), float(step), float(exponent)))


def plain_pair_sup(values, step, exponent):
    """Increment seminorm: reduced sup with zero decay rates."""
    values = _c64(values)
    lam = np.zeros(values.shape[1])
    return float(_impl.reduced_pair_sup(values, lam, float(step), float(exponent)))


def controlled_remainder_sup(y, yp, x, lam, step, exponent):
    return float(_impl.controlled_remainder_sup(
        _c64(y), _c64(yp), _c64(x), _c64(lam), float(step), float(exponent)))


def chen_max_residual(first, second):
    return float(_impl.chen_max_residual(_c64(first), _c64(second)))


def second_level_sums(da, db, trapezoid):
    return np.asarray(_impl.second_level_sums(_c64(da), _c64(db), bool(trapezoid)))
