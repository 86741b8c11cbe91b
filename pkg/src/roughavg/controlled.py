"""Semigroup-controlled paths and the rough convolution.

A controlled path is a pair ``(Y, Y')`` on the driver's grid.  ``Y`` takes
values either in the state space (shape ``(n+1, N)``) or in the space of
driver-indexed families (shape ``(n+1, D, N)``, one state per driver
component).  The Gubinelli derivative ``Y'`` carries one extra leading
driver axis; for the family-valued case ``deriv[u, l, k]`` multiplies the
second-level entry with increment slot ``l`` and integrator slot ``k``.

The defining remainder is ``Y_t - S_(t-s)(Y_s + Y'_s dX_(t,s))``; it must be
small of order ``2 gamma``, which is what the seminorm routine measures.
The rough convolution is the compensated left-point sum
``sum_u S_(t - t_u)(Y_u dX + Y'_u X2)`` over consecutive grid intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import InvalidInputError, UnsupportedCoefficientError
from .roughpath import RoughPath
from .spectral import Generator

__all__ = [
    "ControlledPath",
    "ControlledSeminorm",
    "reduced_increment",
    "controlled_seminorm",
    "rough_convolution",
    "compose_function",
]


@dataclass(frozen=True)
class ControlledPath:
    """Pair (value, Gubinelli derivative) on a shared grid.

    ``value``: (n+1, N) or (n+1, D, N); ``deriv``: (n+1, D) + value.shape[1:].
    ``alpha`` is the base interpolation index used by the seminorms.
    """

    grid: np.ndarray
    value: np.ndarray
    deriv: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        grid = np.ascontiguousarray(self.grid, dtype=np.float64)
        value = np.ascontiguousarray(self.value, dtype=np.float64)
        deriv = np.ascontiguousarray(self.deriv, dtype=np.float64)
        if value.ndim not in (2, 3) or value.shape[0] != grid.size:
            raise InvalidInputError("value must be (n+1, N) or (n+1, D, N)")
        if deriv.shape[0] != grid.size or deriv.shape[2:] != value.shape[1:]:
            raise InvalidInputError("deriv must be (n+1, D) + value.shape[1:]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "deriv", deriv)

    @property
    def driver_dim(self) -> int:
        return self.deriv.shape[1]

    @property
    def family_valued(self) -> bool:
        """True when values live in the driver-indexed family space."""
        return self.value.ndim == 3


def reduced_increment(values: np.ndarray, grid: np.ndarray, i: int, j: int,
                      gen: Optional[Generator]) -> np.ndarray:
    """``f_j - S_(t_j - t_i) f_i``; vanishes identically on semigroup orbits.

    ``gen=None`` means the identity semigroup (the classical increment)."""
    if j < i:
        raise InvalidInputError("requires i <= j")
    if gen is None:
        return values[j] - values[i]
    factors = gen.semigroup_factors(float(grid[j] - grid[i]))
    return values[j] - factors * values[i]


class ControlledSeminorm(NamedTuple):
    deriv_holder: float     # reduced gamma-Hoelder seminorm of Y'
    remainder: float        # 2 gamma seminorm of the remainder
    combined: float


def _alpha_weights(gen: Generator, alpha: float) -> np.ndarray:
    return gen.eigenvalues ** alpha


def _flatten_family(arr: np.ndarray) -> np.ndarray:
    """(n+1, ..., N) -> (n+1, K) preserving the leading axis."""
    return arr.reshape(arr.shape[0], -1)


def controlled_seminorm(cp: ControlledPath, driver: RoughPath, gamma: float,
                        gen: Generator) -> ControlledSeminorm:
    """Discrete sups of the two constituents of the controlled-path seminorm.

    Both seminorms are taken in the ``alpha`` interpolation norm recorded on
    the path (mode weights ``lam^alpha``), over all grid pairs.
    """
    if not np.array_equal(cp.grid, driver.grid):
        raise InvalidInputError("controlled path and driver must share the grid")
    h = driver.step
    w = _alpha_weights(gen, cp.alpha)
    n_rep = int(np.prod(cp.value.shape[1:-1], dtype=int)) if cp.value.ndim > 2 else 1
    lam_flat = np.tile(gen.eigenvalues, n_rep)

    dprime = _flatten_family(cp.deriv * w)
    lam_dprime = np.tile(gen.eigenvalues, dprime.shape[1] // gen.n_modes)
    deriv_holder = kernels.reduced_pair_sup(dprime, lam_dprime, h, gamma)

    y = _flatten_family(cp.value * w)
    d = cp.driver_dim
    yp = (cp.deriv * w).reshape(cp.grid.size, d, -1)
    remainder = kernels.controlled_remainder_sup(
        y, yp, driver.first, lam_flat, h, 2.0 * gamma)
    return ControlledSeminorm(deriv_holder, remainder, deriv_holder + remainder)


def rough_convolution(driver: RoughPath, cp: ControlledPath, i: int, j: int,
                      gen: Optional[Generator]) -> np.ndarray:
    """Compensated sum ``sum_u S_(t_j - t_u)(Y_u dX_(u+1,u) + Y'_u X2_(u+1,u))``.

    Requires a family-valued integrand; evaluated on the stored grid
    restricted to ``[t_i, t_j]`` (refinement studies regenerate the inputs
    on finer grids instead of subdividing here).  ``gen=None`` is the
    identity semigroup, i.e. the classical rough integral.
    """
    if not cp.family_valued:
        raise InvalidInputError("rough_convolution needs a family-valued integrand")
    if not np.array_equal(cp.grid, driver.grid):
        raise InvalidInputError("integrand and driver must share the grid")
    if not 0 <= i < j <= driver.n_intervals:
        raise InvalidInputError(f"need 0 <= i < j <= n, got i={i}, j={j}")
    dx = np.diff(driver.first[i:j + 1], axis=0)              # (j-i, D)
    terms = np.einsum("ukn,uk->un", cp.value[i:j], dx)
    terms += np.einsum("ulkn,ulk->un", cp.deriv[i:j], driver.second[i:j])
    if gen is None:
        return terms.sum(axis=0)
    lags = driver.grid[j] - driver.grid[i:j]                 # (j-i,)
    weights = np.exp(-np.outer(lags, gen.eigenvalues))       # (j-i, N)
    return np.einsum("un,un->n", weights, terms)


def compose_function(cp: ControlledPath,
                     value_fn: Callable[[np.ndarray], np.ndarray],
                     deriv_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]]
                     ) -> ControlledPath:
    """Push a state-valued controlled path through a coefficient function.

    ``value_fn`` maps states ``(..., N)`` to families ``(..., d, N)``;
    ``deriv_fn(x, v)`` applies the Frechet derivative at ``x`` to ``v``.
    The output pair is ``(G(Y), DG(Y) o Y')`` with derivative layout
    ``deriv[u, l] = DG(Y_u)[Y'_u[l]]``.
    """
    if deriv_fn is None:
        raise UnsupportedCoefficientError(
            "coefficient function has no registered derivative")
    if cp.family_valued:
        raise InvalidInputError("compose_function needs a state-valued path")
    z = value_fn(cp.value)
    rows = [deriv_fn(cp.value, cp.deriv[:, l]) for l in range(cp.driver_dim)]
    zp = np.stack(rows, axis=1)
    return ControlledPath(grid=cp.grid, value=z, deriv=zp, alpha=cp.alpha)
