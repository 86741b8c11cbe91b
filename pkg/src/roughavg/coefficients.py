"""Built-in coefficient sets for the slow-fast system.

Two families ship with the package:

* ``dissipative-ou`` -- the fast drift is linear in the fast variable
  (``g(x) - kappa y``) with constant fast diffusion, so the frozen equation
  is an Ornstein-Uhlenbeck process with closed-form invariant mean
  ``g_n(x) / (lam_n + kappa)``.  The slow drift couples back through a
  finite-rank linear map ``P``, giving an analytically known averaged drift
  ``f(x) + P m(x)``.  Note the slow drift is *unbounded* in the fast
  variable (linear), which trades strict boundedness for exact oracles;
  numerically this is benign because the fast process is dissipative.
* ``bounded-nemytskii`` -- everything is tanh-saturated.  The fast drift is
  odd in the fast variable and the fast diffusion even, so the frozen
  stationary law is symmetric under sign flip and the odd slow-drift part
  averages to zero exactly: the averaged drift is the ``f(x)`` part alone.

All maps broadcast over leading batch axes; states are ``(..., N)`` arrays.
Derivative layout conventions match ``controlled.compose_function`` and the
one-step scheme: ``g1_levy(x)[l, k] = DG1^k(x)[G1^l(x)]`` pairs with the
second-level entry ``(l, k)``, and similarly for the fast blocks.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError
from .spectral import Generator

__all__ = [
    "CoefficientSet",
    "DissipativeOU",
    "BoundedNemytskii",
    "ZeroCoefficients",
    "make_coefficients",
    "COEFFICIENT_NAMES",
]

# max slope of tanh^2, attained at tanh = 1/sqrt(3)
_TANH_SQ_SLOPE = 4.0 / (3.0 * math.sqrt(3.0))


def _sech2(z):
    c = np.cosh(z)
    return 1.0 / (c * c)


def _bumps(n_modes: int, count: int, start: int, spacing: int, width: float) -> np.ndarray:
    """Unit-norm Gaussian bumps over the mode axis, one per column index."""
    centers = start + spacing * np.arange(count)
    idx = np.arange(n_modes)
    prof = np.exp(-((idx[None, :] - centers[:, None]) / width) ** 2)
    return prof / np.linalg.norm(prof, axis=1, keepdims=True)


class CoefficientSet:
    """Interface shared by all coefficient sets.

    Subclasses implement the maps and declare ``lip_f2`` / ``lip_g2`` (the
    fast-variable Lipschitz constants entering the dissipativity condition)
    and ``f1_bound`` (sup norm of the slow drift; ``inf`` when unbounded).
    """

    name: str = "abstract"
    g2_constant: bool = False

    def __init__(self, gen: Generator, d: int, m: int):
        if d < 1 or m < 1:
            raise InvalidInputError("driver dimensions must be >= 1")
        self.gen = gen
        self.d = d
        self.m = m
        self.lip_f2 = 0.0
        self.lip_g2 = 0.0
        self.f1_bound = math.inf

    # -- maps ------------------------------------------------------------
    def f1(self, x, y):
        raise NotImplementedError

    def f2(self, x, y):
        raise NotImplementedError

    def g1_value(self, x):
        raise NotImplementedError

    def g1_deriv(self, x, v):
        raise NotImplementedError

    def g2_value(self, x, y):
        raise NotImplementedError

    def g2_deriv_x(self, x, y, v):
        raise NotImplementedError

    def g2_deriv_y(self, x, y, v):
        raise NotImplementedError

    def averaged_f1(self, x):
        """Closed-form averaged slow drift, or None when only the Monte
        Carlo estimator is available."""
        return None

    # -- contracted second-order coefficients -----------------------------
    def g1_levy(self, x):
        g1 = self.g1_value(x)
        rows = [self.g1_deriv(x, g1[..., l, :]) for l in range(self.d)]
        return np.stack(rows, axis=-3)

    def g2_levy_y(self, x, y):
        if self.g2_constant:
            return self._zeros(x, (self.m, self.m))
        g2 = self.g2_value(x, y)
        rows = [self.g2_deriv_y(x, y, g2[..., j, :]) for j in range(self.m)]
        return np.stack(rows, axis=-3)

    def g2_cross(self, x, y):
        if self.g2_constant:
            return self._zeros(x, (self.d, self.m))
        g1 = self.g1_value(x)
        rows = [self.g2_deriv_x(x, y, g1[..., l, :]) for l in range(self.d)]
        return np.stack(rows, axis=-3)

    def _zeros(self, x, extra):
        x = np.asarray(x)
        return np.zeros(x.shape[:-1] + extra + (self.gen.n_modes,))


class _TanhSlowDiffusion:
    """Shared slow diffusion: column k is
    ``gain (1 + wobble tanh(x_k)) psi_k`` with unit bump profiles psi."""

    def __init__(self, gen: Generator, d: int, gain: float, wobble: float):
        self.gain = gain
        self.wobble = wobble
        self.profiles = _bumps(gen.n_modes, d, start=0, spacing=3, width=2.0)
        self.d = d

    def value(self, x):
        x = np.asarray(x)
        amp = self.gain * (1.0 + self.wobble * np.tanh(x[..., :self.d]))
        return amp[..., :, None] * self.profiles

    def deriv(self, x, v):
        x = np.asarray(x)
        v = np.asarray(v)
        amp = self.gain * self.wobble * _sech2(x[..., :self.d]) * v[..., :self.d]
        return amp[..., :, None] * self.profiles


class DissipativeOU(CoefficientSet):
    """Linear-in-y fast dynamics with constant fast diffusion.

    Frozen equation per mode: ``dY_n = (-lam_n - kappa) Y_n dt + g_n(x) dt
    + (sigma2 zeta)_n dW``; invariant mean ``m_n(x) = g_n(x)/(lam_n+kappa)``.
    Averaged slow drift: ``f(x) + P m(x)`` with ``P`` acting as
    ``slow_coupling`` on the first ``rank`` modes.
    """

    name = "dissipative-ou"
    g2_constant = True

    def __init__(self, gen: Generator, d: int = 2, m: int = 2, kappa: float = 0.5,
                 rank: int = 2, slow_coupling: float = 0.25, drift_gain: float = 0.3,
                 fast_forcing: float = 0.2, g1_gain: float = 0.35,
                 g1_wobble: float = 0.5, sigma2: float = 1.0):
        super().__init__(gen, d, m)
        if not 0.0 < kappa < gen.eigenvalues[0]:
            raise InvalidInputError("kappa must lie in (0, lam_1) to pass H4")
        if rank < 1 or rank > gen.n_modes:
            raise InvalidInputError("rank must lie in [1, n_modes]")
        self.kappa = kappa
        self.rank = rank
        self.slow_coupling = slow_coupling
        self.drift_gain = drift_gain
        self.fast_forcing = fast_forcing
        n = gen.n_modes
        self._f_weights = np.exp(-np.arange(n) / 4.0)
        self._g_weights = np.exp(-np.arange(n) / 6.0)
        self._slow_diffusion = _TanhSlowDiffusion(gen, d, g1_gain, g1_wobble)
        self._g2 = sigma2 * _bumps(n, m, start=0, spacing=2, width=3.0)
        self.lip_f2 = kappa
        self.lip_g2 = 0.0
        self.f1_bound = math.inf  # linear fast coupling, see class docstring

    def _p_apply(self, y):
        out = np.zeros_like(np.asarray(y, dtype=np.float64))
        out[..., :self.rank] = self.slow_coupling * y[..., :self.rank]
        return out

    def f1(self, x, y):
        return self.drift_gain * np.tanh(x) * self._f_weights + self._p_apply(y)

    def _g_forcing(self, x):
        return self.fast_forcing * np.tanh(x) * self._g_weights

    def f2(self, x, y):
        return self._g_forcing(x) - self.kappa * np.asarray(y)

    def g1_value(self, x):
        return self._slow_diffusion.value(x)

    def g1_deriv(self, x, v):
        return self._slow_diffusion.deriv(x, v)

    def g2_value(self, x, y):
        x = np.asarray(x)
        return np.broadcast_to(self._g2, x.shape[:-1] + self._g2.shape).copy()

    def g2_deriv_x(self, x, y, v):
        return self._zeros(x, (self.m,))

    def g2_deriv_y(self, x, y, v):
        return self._zeros(x, (self.m,))

    def invariant_mean(self, x):
        """Stationary mean of the frozen equation, mode by mode."""
        return self._g_forcing(x) / (self.gen.eigenvalues + self.kappa)

    def averaged_f1(self, x):
        return self.drift_gain * np.tanh(x) * self._f_weights \
            + self._p_apply(self.invariant_mean(x))


class BoundedNemytskii(CoefficientSet):
    """Tanh-saturated coefficients; fast drift odd and fast diffusion even
    in the fast variable, so the averaged slow drift is the ``f(x)`` part
    exactly (the frozen stationary law is sign-flip symmetric)."""

    name = "bounded-nemytskii"

    def __init__(self, gen: Generator, d: int = 2, m: int = 2, kappa: float = 0.25,
                 sat_gain: float = 0.1, sat_x: float = 0.3, drift_gain: float = 0.3,
                 odd_gain: float = 0.25, g1_gain: float = 0.35, g1_wobble: float = 0.5,
                 sigma2: float = 0.7, g2_x: float = 0.2, g2_y: float = 0.15):
        super().__init__(gen, d, m)
        n = gen.n_modes
        if 2 * m > n:
            raise InvalidInputError("needs n_modes >= 2 m for the probe vectors")
        self.kappa = kappa
        self.sat_gain = sat_gain
        self.sat_x = sat_x
        self.drift_gain = drift_gain
        self.odd_gain = odd_gain
        self.sigma2 = sigma2
        self.g2_x = g2_x
        self.g2_y = g2_y
        self._f_weights = np.exp(-np.arange(n) / 4.0)
        self._v_weights = np.exp(-np.arange(n) / 3.0)
        self._x_probe = np.ones(n) / math.sqrt(n)
        self._slow_diffusion = _TanhSlowDiffusion(gen, d, g1_gain, g1_wobble)
        self._zeta = _bumps(n, m, start=0, spacing=2, width=3.0)
        # orthonormal probe directions for the x / y dependence of G2
        self._chi = np.eye(n)[0:2 * m:2]
        self._xi = np.eye(n)[1:2 * m:2]
        self.lip_f2 = kappa + sat_gain * (1.0 + sat_x)
        self.lip_g2 = sigma2 * g2_y * _TANH_SQ_SLOPE
        self.f1_bound = float(np.linalg.norm(
            drift_gain * self._f_weights + odd_gain * self._v_weights))

    def f1(self, x, y):
        return self.drift_gain * np.tanh(x) * self._f_weights \
            + self.odd_gain * np.tanh(y) * self._v_weights

    def f2(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        scale = 1.0 + self.sat_x * np.tanh(x @ self._x_probe)
        return -self.kappa * y - self.sat_gain * scale[..., None] * np.tanh(y)

    def g1_value(self, x):
        return self._slow_diffusion.value(x)

    def g1_deriv(self, x, v):
        return self._slow_diffusion.deriv(x, v)

    def _g2_amplitudes(self, x, y):
        px = np.tanh(np.asarray(x) @ self._chi.T)
        py = np.tanh(np.asarray(y) @ self._xi.T)
        return self.sigma2 * (1.0 + self.g2_x * px + self.g2_y * py * py)

    def g2_value(self, x, y):
        return self._g2_amplitudes(x, y)[..., :, None] * self._zeta

    def g2_deriv_x(self, x, y, v):
        proj = np.asarray(v) @ self._chi.T
        amp = self.sigma2 * self.g2_x * _sech2(np.asarray(x) @ self._chi.T) * proj
        return amp[..., :, None] * self._zeta

    def g2_deriv_y(self, x, y, v):
        py = np.asarray(y) @ self._xi.T
        proj = np.asarray(v) @ self._xi.T
        amp = self.sigma2 * self.g2_y * 2.0 * np.tanh(py) * _sech2(py) * proj
        return amp[..., :, None] * self._zeta

    def averaged_f1(self, x):
        return self.drift_gain * np.tanh(x) * self._f_weights


class ZeroCoefficients(CoefficientSet):
    """All maps vanish; the system reduces to the free semigroup flow."""

    name = "zero"
    g2_constant = True

    def __init__(self, gen: Generator, d: int = 1, m: int = 1):
        super().__init__(gen, d, m)
        self.f1_bound = 0.0

    def f1(self, x, y):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def f2(self, x, y):
        return np.zeros_like(np.asarray(y, dtype=np.float64))

    def g1_value(self, x):
        return self._zeros(x, (self.d,))

    def g1_deriv(self, x, v):
        return self._zeros(x, (self.d,))

    def g2_value(self, x, y):
        return self._zeros(x, (self.m,))

    def g2_deriv_x(self, x, y, v):
        return self._zeros(x, (self.m,))

    def g2_deriv_y(self, x, y, v):
        return self._zeros(x, (self.m,))

    def averaged_f1(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))


COEFFICIENT_NAMES = ("dissipative-ou", "bounded-nemytskii", "zero")


def make_coefficients(name: str, gen: Generator, **params) -> CoefficientSet:
    """Factory keyed by the config name; unknown parameters raise."""
    classes = {
        "dissipative-ou": DissipativeOU,
        "bounded-nemytskii": BoundedNemytskii,
        "zero": ZeroCoefficients,
    }
    if name not in classes:
        raise InvalidInputError(
            f"unknown coefficient set {name!r}; choose from {sorted(classes)}")
    try:
        return classes[name](gen, **params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for {name!r}: {exc}") from None
