"""Frozen equation, averaged drift estimation, auxiliary process, and the
reduced-Hoelder error functional.

The frozen equation evolves the fast variable on its own time scale with
the slow argument held fixed; its invariant law defines the averaged slow
drift, estimated here by an ensemble at a burn-in time chosen from the
measured coupled-contraction rate (no time-averaging, so no autocorrelation
bookkeeping).  The auxiliary process is the fast solve with the slow
argument piecewise-frozen on blocks of length delta, the bridge between
the coupled and frozen dynamics.  The error functional between two slow
paths is the semigroup-reduced Hoelder seminorm of their difference, which
annihilates pure semigroup orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.stats import linregress

from . import kernels
from .coefficients import CoefficientSet
from .errors import BlowUpError, ConfigurationError, InvalidInputError
from .rng import Streams, stream_generator
from .roughpath import RoughPath
from .solver import verify_h4
from .spectral import Generator

__all__ = [
    "AveragedDriftEstimate",
    "ErgodicityFit",
    "frozen_solve",
    "ergodicity_decay",
    "averaged_drift",
    "MCDriftOracle",
    "solve_averaged",
    "auxiliary_solve",
    "reduced_holder_error",
    "delta_schedule",
]

# ensemble burn-in must suppress the initial condition to this level
_BURN_IN_TARGET = 1e-3


def frozen_solve(x, y0, c: CoefficientSet, gen: Generator, horizon: float,
                 n_steps: int, rng=None, dw: Optional[np.ndarray] = None,
                 check_h4: bool = True) -> np.ndarray:
    """Exponential Euler for the frozen fast equation at slow argument ``x``.

    Returns the path ``(n_steps+1, ..., N)``; ``y0`` (and ``dw`` of shape
    ``(..., n_steps, m)``) broadcast over batch axes.  Pass ``dw`` to couple
    several solves to one noise realization.
    """
    if check_h4 and not verify_h4(c, gen).passed:
        raise ConfigurationError("dissipativity condition fails for this set")
    if n_steps < 1 or horizon <= 0:
        raise InvalidInputError("need horizon > 0 and n_steps >= 1")
    h = horizon / n_steps
    if dw is None:
        if rng is None:
            raise InvalidInputError("provide either rng or dw")
        shape = np.asarray(y0, dtype=np.float64).shape[:-1] + (n_steps, c.m)
        dw = rng.standard_normal(shape) * math.sqrt(h)
    dw = np.asarray(dw, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y0, dtype=np.float64).copy()
    out = np.empty((n_steps + 1,) + y.shape)
    out[0] = y
    sy = gen.semigroup_factors(h)
    for u in range(n_steps):
        y = sy * (y + h * c.f2(x, y)
                  + np.einsum("...kn,...k->...n", c.g2_value(x, y), dw[..., u, :]))
        if not np.all(np.isfinite(y)):
            raise BlowUpError(f"frozen solve blew up at step {u}", step=u,
                              time=(u + 1) * h)
        out[u + 1] = y
    return out


@dataclass(frozen=True)
class ErgodicityFit:
    """Coupled-difference decay fit: slope of log E|Y1 - Y2|^2 against t."""

    slope: float
    intercept: float
    rho_bound: float          # lam_1 - L_F2 - L_G2^2, the contraction margin
    passed: bool              # slope <= -rho_bound
    times: np.ndarray
    mean_sq: np.ndarray


def ergodicity_decay(x, y1, y2, c: CoefficientSet, gen: Generator, horizon: float,
                     n_steps: int, n_samples: int, master_seed: int) -> ErgodicityFit:
    """Couple two frozen solves on the same noise and fit the decay rate of
    the mean squared difference.  The fit window stops where the mean hits
    the floating-point cancellation floor."""
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    h = horizon / n_steps
    dw = np.empty((n_samples, n_steps, c.m))
    for s in range(n_samples):
        rng = stream_generator(master_seed, s, Streams.FROZEN_NOISE)
        dw[s] = rng.standard_normal((n_steps, c.m)) * math.sqrt(h)
    stack1 = np.broadcast_to(y1, (n_samples,) + y1.shape).copy()
    stack2 = np.broadcast_to(y2, (n_samples,) + y2.shape).copy()
    p1 = frozen_solve(x, stack1, c, gen, horizon, n_steps, dw=dw)
    p2 = frozen_solve(x, stack2, c, gen, horizon, n_steps, dw=dw)
    diff = p1 - p2
    mean_sq = np.einsum("tsn,tsn->t", diff, diff) / n_samples
    times = np.linspace(0.0, horizon, n_steps + 1)
    rho = float(gen.eigenvalues[0]) - c.lip_f2 - c.lip_g2 ** 2
    if np.all(mean_sq == 0.0):
        # coupled starts coincide; the difference vanishes identically
        return ErgodicityFit(slope=-math.inf, intercept=-math.inf,
                             rho_bound=rho, passed=True,
                             times=times, mean_sq=mean_sq)
    floor = max(mean_sq[0] * 1e-12, 1e-28)
    keep = mean_sq > floor
    keep[0] = True
    cut = int(np.argmin(keep)) if not keep.all() else times.size
    cut = max(cut, 5)
    fit = linregress(times[:cut], np.log(mean_sq[:cut]))
    return ErgodicityFit(slope=float(fit.slope), intercept=float(fit.intercept),
                         rho_bound=rho, passed=bool(fit.slope <= -rho),
                         times=times[:cut], mean_sq=mean_sq[:cut])


@dataclass(frozen=True)
class AveragedDriftEstimate:
    """Ensemble estimate of the averaged slow drift at one slow state."""

    x: np.ndarray
    value: np.ndarray
    stderr: float             # Euclidean norm of the per-component standard errors
    burn_in: float
    samples: int


def averaged_drift(x, c: CoefficientSet, gen: Generator, t_star: float,
                   n_samples: int, h: float, master_seed: int,
                   y0: Optional[np.ndarray] = None,
                   decay_slope: Optional[float] = None) -> AveragedDriftEstimate:
    """Ensemble-at-burn-in estimator of the averaged slow drift.

    ``decay_slope`` (negative, from ``ergodicity_decay``) guards the burn-in:
    ``exp(slope * t_star)`` must not exceed 1e-3, otherwise the initial
    condition still contaminates the ensemble and this raises.
    """
    if decay_slope is not None:
        if decay_slope >= 0.0 or math.exp(decay_slope * t_star) > _BURN_IN_TARGET:
            raise ConfigurationError(
                f"burn-in {t_star} too short for measured decay {decay_slope:.4g}")
    x = np.asarray(x, dtype=np.float64)
    n_steps = max(int(math.ceil(t_star / h)), 1)
    if y0 is None:
        y0 = np.zeros(gen.n_modes)
    dw = np.empty((n_samples, n_steps, c.m))
    step = t_star / n_steps
    for s in range(n_samples):
        rng = stream_generator(master_seed, s, Streams.FROZEN_NOISE)
        dw[s] = rng.standard_normal((n_steps, c.m)) * math.sqrt(step)
    stack = np.broadcast_to(np.asarray(y0, dtype=np.float64),
                            (n_samples, gen.n_modes)).copy()
    path = frozen_solve(x, stack, c, gen, t_star, n_steps, dw=dw)
    draws = c.f1(x, path[-1])                       # (n_samples, N)
    value = draws.mean(axis=0)
    if n_samples > 1:
        se = draws.std(axis=0, ddof=1) / math.sqrt(n_samples)
        stderr = float(np.linalg.norm(se))
    else:
        stderr = 0.0
    return AveragedDriftEstimate(x=x, value=value, stderr=stderr,
                                 burn_in=t_star, samples=n_samples)


@dataclass
class MCDriftOracle:
    """Averaged-drift evaluations cached on a quantized state grid.

    Evaluations are keyed by ``round(x / quant)``; each new cache entry gets
    its own frozen-ensemble sample index, so a fixed evaluation order yields
    bit-reproducible results.  ``quant_error`` records the worst-case state
    displacement introduced by the quantization.
    """

    c: CoefficientSet
    gen: Generator
    t_star: float
    n_samples: int
    h: float
    master_seed: int
    decay_slope: Optional[float] = None
    quant: float = 1e-3
    _cache: Dict[Tuple[int, ...], AveragedDriftEstimate] = field(default_factory=dict)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        key = tuple(int(k) for k in np.round(np.asarray(x) / self.quant))
        est = self._cache.get(key)
        if est is None:
            xq = np.asarray(key, dtype=np.float64) * self.quant
            est = averaged_drift(xq, self.c, self.gen, self.t_star,
                                 self.n_samples, self.h,
                                 self.master_seed + 7 * len(self._cache),
                                 decay_slope=self.decay_slope)
            self._cache[key] = est
        return est.value

    @property
    def quant_error(self) -> float:
        return 0.5 * self.quant * math.sqrt(self.gen.n_modes)

    @property
    def max_stderr(self) -> float:
        return max((e.stderr for e in self._cache.values()), default=0.0)

    @property
    def n_entries(self) -> int:
        return len(self._cache)


def solve_averaged(x0, c: CoefficientSet, gen: Generator, b_path: RoughPath,
                   drift: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                   check_h4: bool = True) -> np.ndarray:
    """Slow one-step scheme with the slow drift replaced by the averaged one.

    ``drift`` defaults to the coefficient set's closed form; pass an
    ``MCDriftOracle`` for the sampled variant.  Returns the path (n+1, N).
    """
    if drift is None:
        if c.averaged_f1(np.zeros(gen.n_modes)) is None:
            raise ConfigurationError(
                f"{c.name} has no closed-form averaged drift; pass an oracle")
        drift = c.averaged_f1
    if check_h4 and not verify_h4(c, gen).passed:
        raise ConfigurationError("dissipativity condition fails for this set")
    if b_path.dim != c.d:
        raise InvalidInputError("driver dimension does not match the coefficients")
    grid = b_path.grid
    n = b_path.n_intervals
    db = np.diff(b_path.first, axis=0)
    x = np.asarray(x0, dtype=np.float64).copy()
    out = np.empty((n + 1, x.shape[-1]))
    out[0] = x
    for u in range(n):
        h = float(grid[u + 1] - grid[u])
        sx = gen.semigroup_factors(h)
        slow = x + h * drift(x)
        slow += np.einsum("kn,k->n", c.g1_value(x), db[u])
        slow += np.einsum("lkn,lk->n", c.g1_levy(x), b_path.second[u])
        x = sx * slow
        if not np.all(np.isfinite(x)):
            raise BlowUpError(f"averaged solve blew up at step {u}", step=u,
                              time=float(grid[u]))
        out[u + 1] = x
    return out


def auxiliary_solve(x_path, y0, c: CoefficientSet, gen: Generator, dw, grid,
                    eps: float, delta: float) -> np.ndarray:
    """Fast solve with the slow argument frozen on blocks of length delta.

    ``delta`` must be a positive multiple of the grid step; the slow path is
    sampled at ``floor(t / delta) * delta`` and the same fast increments as
    the coupled solve must be passed in for the comparison to make sense.
    """
    from .solver import solve_fast_ito

    grid = np.asarray(grid, dtype=np.float64)
    h = float(grid[1] - grid[0])
    ratio = delta / h
    lag = int(round(ratio))
    if delta <= 0 or lag < 1 or abs(ratio - lag) > 1e-9 * max(ratio, 1.0):
        raise ConfigurationError(
            f"delta = {delta} is not a positive multiple of the grid step {h}")
    return solve_fast_ito(x_path, y0, c, gen, dw, grid, eps, lag_steps=lag)


def reduced_holder_error(slow_a: np.ndarray, slow_b: np.ndarray, gen: Generator,
                         grid, eta: float) -> float:
    """Semigroup-reduced eta-Hoelder seminorm of the difference of two slow
    paths sharing a grid: sup over pairs s < t of
    ``|(a - b)_t - S_(t-s)(a - b)_s| / (t - s)^eta`` in the base norm."""
    slow_a = np.asarray(slow_a, dtype=np.float64)
    slow_b = np.asarray(slow_b, dtype=np.float64)
    if slow_a.shape != slow_b.shape:
        raise InvalidInputError("paths must share shape")
    grid = np.asarray(grid, dtype=np.float64)
    if slow_a.shape[0] != grid.size:
        raise InvalidInputError("paths must live on the given grid")
    dt = np.diff(grid)
    if not np.allclose(dt, dt[0], rtol=1e-12, atol=0.0):
        raise InvalidInputError("reduced_holder_error requires a uniform grid")
    diff = slow_a - slow_b
    return kernels.reduced_pair_sup(diff, gen.eigenvalues, float(dt[0]), eta)


def delta_schedule(eps: float, gamma: float) -> float:
    """Block length for the time discretization: ``eps^(1 / (2 (1 + 2 gamma)))``.

    Callers round the result up to the nearest grid multiple.
    """
    if not 0.0 < eps <= 1.0:
        raise InvalidInputError("eps must lie in (0, 1]")
    if not 1.0 / 3.0 < gamma <= 0.5:
        raise InvalidInputError("gamma must lie in (1/3, 1/2]")
    return float(eps ** (1.0 / (2.0 * (1.0 + 2.0 * gamma))))
