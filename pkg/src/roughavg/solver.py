"""Coupled slow-fast one-step scheme and the independent Ito fast solver.

The scheme is the first-order mild (exponential-Euler) rough step.  Per
interval of length ``h`` with driver blocks ``dB, B2, dW, W2, I_BW``:

    X+ = S_h   [ X + h F1 + G1 dB + (DG1 G1) : B2 ]
    Y+ = S_h/e [ Y + (h/e) F2 + e^-1/2 G2 dW + e^-1 (DyG2 G2) : W2
                 + e^-1/2 (DxG2 G1) : I_BW ]

`:` contracts a driver-indexed family against a second-level block with the
increment slot first.  Zeroing every second-level input degenerates the
step to classical exponential Euler, which is exactly what the independent
fast solver below does (it consumes first-level fast increments only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSet
from .errors import BlowUpError, ConfigurationError, InvalidInputError
from .roughpath import RoughPath
from .spectral import Generator

__all__ = [
    "H4Result",
    "verify_h4",
    "XiBlocks",
    "SlowFastPaths",
    "step_slow_fast",
    "solve_slow_fast",
    "solve_fast_ito",
    "slow_blocks",
    "as_controlled",
]


@dataclass(frozen=True)
class H4Result:
    passed: bool
    margin: float


def verify_h4(c: CoefficientSet, gen: Generator) -> H4Result:
    """Dissipativity margin ``lam_1 - L_F2 - 3 L_G2^2``; pass iff > 0."""
    margin = float(gen.eigenvalues[0]) - c.lip_f2 - 3.0 * c.lip_g2 ** 2
    return H4Result(passed=margin > 0.0, margin=margin)


@dataclass(frozen=True)
class XiBlocks:
    """Per-interval driver data consumed by the coupled step."""

    db: np.ndarray    # (n, d)
    dw: np.ndarray    # (n, m)
    b2: np.ndarray    # (n, d, d)
    w2: np.ndarray    # (n, m, m)
    ibw: np.ndarray   # (n, d, m); increment slot indexes the slow driver

    @classmethod
    def from_mixed(cls, xi: RoughPath, d: int, m: int) -> "XiBlocks":
        if xi.dim != d + m:
            raise InvalidInputError(f"mixed path has dim {xi.dim}, expected {d + m}")
        first = xi.first
        sec = xi.second
        return cls(db=np.diff(first[:, :d], axis=0), dw=np.diff(first[:, d:], axis=0),
                   b2=sec[:, :d, :d], w2=sec[:, d:, d:], ibw=sec[:, :d, d:])


@dataclass(frozen=True)
class SlowFastPaths:
    grid: np.ndarray
    slow: np.ndarray   # (n+1, N)
    fast: np.ndarray   # (n+1, N)


def slow_blocks(b: RoughPath):
    """First-level increments and second-level blocks of a slow driver."""
    return np.diff(b.first, axis=0), b.second


def as_controlled(grid, slow_path: np.ndarray, c: CoefficientSet, gen: Generator):
    """Package a slow trajectory as the controlled pair (X, G1(X)) for norm
    computations against its driver."""
    from .controlled import ControlledPath

    return ControlledPath(grid=np.asarray(grid, dtype=np.float64),
                          value=np.asarray(slow_path, dtype=np.float64),
                          deriv=c.g1_value(slow_path))


def _require_finite(arr, label, step, time):
    if not np.all(np.isfinite(arr)):
        raise BlowUpError(f"non-finite {label} at step {step} (t = {time:.6g})",
                          step=step, time=time)


def _check_f1_bound(c, f1v, step, time):
    if math.isfinite(c.f1_bound):
        norm = float(np.sqrt(np.sum(f1v * f1v, axis=-1).max()))
        if norm > c.f1_bound * (1.0 + 1e-9):
            raise BlowUpError(
                f"declared slow-drift bound violated at step {step}: "
                f"{norm:.6g} > {c.f1_bound:.6g}", step=step, time=time)


def step_slow_fast(x, y, c: CoefficientSet, gen: Generator, db, b2, dw, w2, ibw,
                   eps: float, h: float, step: int = 0, time: float = 0.0):
    """One coupled step; broadcasts over leading batch axes of the state."""
    if h <= 0 or eps <= 0:
        raise InvalidInputError("h and eps must be > 0")
    sx = gen.semigroup_factors(h)
    sy = gen.semigroup_factors(h / eps)
    root_eps = math.sqrt(eps)

    f1v = c.f1(x, y)
    _check_f1_bound(c, f1v, step, time)
    slow = x + h * f1v
    slow += np.einsum("...kn,...k->...n", c.g1_value(x), db)
    slow += np.einsum("...lkn,...lk->...n", c.g1_levy(x), b2)
    x_next = sx * slow

    fast = y + (h / eps) * c.f2(x, y)
    fast += np.einsum("...kn,...k->...n", c.g2_value(x, y), dw) / root_eps
    if not c.g2_constant:
        fast += np.einsum("...lkn,...lk->...n", c.g2_levy_y(x, y), w2) / eps
        fast += np.einsum("...lkn,...lk->...n", c.g2_cross(x, y), ibw) / root_eps
    y_next = sy * fast

    _require_finite(x_next, "slow state", step, time)
    _require_finite(y_next, "fast state", step, time)
    return x_next, y_next


def solve_slow_fast(x0, y0, c: CoefficientSet, gen: Generator, xi: XiBlocks,
                    grid, eps: float, check_h4: bool = True) -> SlowFastPaths:
    """Iterate the coupled step over the grid; deterministic given inputs."""
    if check_h4:
        h4 = verify_h4(c, gen)
        if not h4.passed:
            raise ConfigurationError(
                f"dissipativity condition fails (margin {h4.margin:.6g})")
    grid = np.asarray(grid, dtype=np.float64)
    n = grid.size - 1
    if xi.db.shape[0] != n:
        raise InvalidInputError("driver blocks do not match the grid")
    x = np.asarray(x0, dtype=np.float64).copy()
    y = np.asarray(y0, dtype=np.float64).copy()
    slow = np.empty((n + 1,) + x.shape)
    fast = np.empty((n + 1,) + y.shape)
    slow[0], fast[0] = x, y
    for u in range(n):
        h = float(grid[u + 1] - grid[u])
        x, y = step_slow_fast(x, y, c, gen, xi.db[u], xi.b2[u], xi.dw[u],
                              xi.w2[u], xi.ibw[u], eps, h,
                              step=u, time=float(grid[u]))
        slow[u + 1], fast[u + 1] = x, y
    return SlowFastPaths(grid=grid, slow=slow, fast=fast)


def solve_fast_ito(x_arg, y0, c: CoefficientSet, gen: Generator, dw, grid,
                   eps: float, lag_steps: int | None = None) -> np.ndarray:
    """Exponential Euler for the fast equation driven by first-level
    increments only; the independent oracle for the coupled fast block.

    ``x_arg`` is either one state (frozen slow argument) or a path
    ``(n+1, N)`` evaluated at the left endpoint of each step; with
    ``lag_steps`` the path is sampled block-wise at ``(u // lag) * lag``.
    ``y0`` and ``dw`` broadcast over leading batch axes (``dw``: (..., n, m)).
    """
    if eps <= 0:
        raise InvalidInputError("eps must be > 0")
    grid = np.asarray(grid, dtype=np.float64)
    n = grid.size - 1
    x_arg = np.asarray(x_arg, dtype=np.float64)
    x_is_path = x_arg.ndim >= 2 and x_arg.shape[0] == n + 1
    if lag_steps is not None and not x_is_path:
        raise InvalidInputError("lag_steps needs a slow path argument")
    dw = np.asarray(dw, dtype=np.float64)
    if dw.shape[-2] != n:
        raise InvalidInputError("fast increments do not match the grid")
    y = np.asarray(y0, dtype=np.float64).copy()
    out = np.empty((n + 1,) + y.shape)
    out[0] = y
    root_eps = math.sqrt(eps)
    for u in range(n):
        h = float(grid[u + 1] - grid[u])
        if x_is_path:
            idx = u if lag_steps is None else (u // lag_steps) * lag_steps
            xs = x_arg[idx]
        else:
            xs = x_arg
        sy = gen.semigroup_factors(h / eps)
        fast = y + (h / eps) * c.f2(xs, y)
        fast += np.einsum("...kn,...k->...n", c.g2_value(xs, y), dw[..., u, :]) / root_eps
        y = sy * fast
        _require_finite(y, "fast state", u, float(grid[u]))
        out[u + 1] = y
    return out
