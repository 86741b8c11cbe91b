import math

import numpy as np
import pytest

from roughavg import roughpath as rp
from roughavg.controlled import (ControlledPath, compose_function,
                                 controlled_seminorm, reduced_increment,
                                 rough_convolution)
from roughavg.errors import InvalidInputError, UnsupportedCoefficientError
from roughavg.kernels import plain_pair_sup, reduced_pair_sup
from roughavg.spectral import apply_semigroup, make_grid


def unit(i, n=8):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def orbit(x0, grid, gen):
    return np.stack([apply_semigroup(t, x0, gen) for t in grid])


class TestReducedIncrement:
    def test_orbit_annihilated(self, gen8, rng):
        grid = make_grid(1.0, 16)
        path = orbit(rng.standard_normal(8), grid, gen8)
        for i, j in [(0, 16), (3, 9), (5, 6)]:
            out = reduced_increment(path, grid, i, j, gen8)
            assert np.abs(out).max() <= 1e-14

    def test_equal_endpoints(self, gen8, rng):
        grid = make_grid(1.0, 4)
        path = rng.standard_normal((5, 8))
        assert np.abs(reduced_increment(path, grid, 2, 2, gen8)).max() == 0.0

    def test_constant_first_mode(self, gen8):
        grid = np.array([0.0, math.log(2.0)])
        path = np.stack([unit(0), unit(0)])
        out = reduced_increment(path, grid, 0, 1, gen8)
        assert out[0] == pytest.approx(0.5, abs=1e-15)
        assert np.abs(out[1:]).max() == 0.0

    def test_rejects_reversed(self, gen8):
        grid = make_grid(1.0, 4)
        with pytest.raises(InvalidInputError):
            reduced_increment(np.zeros((5, 8)), grid, 3, 1, gen8)

    def test_identity_semigroup(self):
        grid = make_grid(1.0, 2)
        path = np.array([[1.0], [3.0], [4.0]])
        assert reduced_increment(path, grid, 0, 2, None)[0] == 3.0


def brownian_controlled(gen, grid, seed=7, fine=8):
    """Family-valued controlled integrand driven by a scalar Brownian lift."""
    spec = rp.LiftSpec(kind="brownian_ito", fine_factor=fine, seed=seed)
    driver = rp.lift_brownian(spec, grid, 1)
    x = driver.first[:, 0]
    profile = np.exp(-np.arange(gen.n_modes) / 2.0)
    value = np.tanh(x)[:, None, None] * profile
    deriv = (1.0 / np.cosh(x) ** 2)[:, None, None, None] * profile
    return driver, ControlledPath(grid=grid, value=value, deriv=deriv)


class TestSeminorm:
    def test_zero_pair(self, gen8):
        grid = make_grid(1.0, 8)
        driver = rp.exact_linear_lift(grid, np.array([1.0]))
        cp = ControlledPath(grid=grid, value=np.zeros((9, 8)),
                            deriv=np.zeros((9, 1, 8)))
        assert controlled_seminorm(cp, driver, 0.4, gen8) == (0.0, 0.0, 0.0)

    def test_orbit_with_zero_derivative(self, gen8, rng):
        grid = make_grid(1.0, 16)
        driver = rp.exact_linear_lift(grid, np.array([1.0]))
        cp = ControlledPath(grid=grid, value=orbit(rng.standard_normal(8), grid, gen8),
                            deriv=np.zeros((17, 1, 8)))
        out = controlled_seminorm(cp, driver, 0.4, gen8)
        assert out.deriv_holder == 0.0
        assert out.remainder <= 1e-13
        assert out.combined == out.deriv_holder + out.remainder

    def test_holder_bound_inequality(self, gen8):
        # reduced seminorm of Y is controlled by the remainder and the
        # derivative sup against the driver's increment seminorm
        gamma = 0.4
        for seed in range(6):
            grid = make_grid(1.0, 64)
            driver, cp = brownian_controlled(gen8, grid, seed=seed)
            sem = controlled_seminorm(cp, driver, gamma, gen8)
            h = 1.0 / 64
            lhs = reduced_pair_sup(cp.value[:, 0], gen8.eigenvalues, h, gamma)
            x_holder = plain_pair_sup(driver.first, h, gamma)
            deriv_sup = float(np.sqrt(np.einsum("ulkn,ulkn->u", cp.deriv,
                                                cp.deriv)).max())
            rhs = sem.remainder * 1.0 ** gamma + deriv_sup * x_holder
            assert lhs <= rhs * (1.0 + 1e-12)


class TestRoughConvolution:
    def test_classical_integral_identity_semigroup(self):
        # constant integrand against a linear driver, no semigroup
        grid = make_grid(2.0, 64)
        driver = rp.exact_linear_lift(grid, np.array([1.0]))
        c = np.array([0.3, -0.7])
        value = np.broadcast_to(c, (65, 1, 2)).copy()
        cp = ControlledPath(grid=grid, value=value, deriv=np.zeros((65, 1, 1, 2)))
        out = rough_convolution(driver, cp, 0, 64, None)
        assert np.allclose(out, 2.0 * c, atol=1e-14)

    def test_semigroup_convolution_closed_form(self, gen8):
        # one constant mode with its natural derivative: second-order exact
        grid = make_grid(1.0, 512)
        driver = rp.exact_linear_lift(grid, np.array([1.0]))
        c = unit(0) + unit(1)
        value = np.broadcast_to(c, (513, 1, 8)).copy()
        deriv = np.broadcast_to(gen8.eigenvalues * c, (513, 1, 1, 8)).copy()
        cp = ControlledPath(grid=grid, value=value, deriv=deriv)
        out = rough_convolution(driver, cp, 0, 512, gen8)
        lam = gen8.eigenvalues
        want = c * (1.0 - np.exp(-lam)) / lam
        assert np.abs(out - want).max() <= 5e-6

    def test_chasles_with_semigroup_weights(self, gen8):
        grid = make_grid(1.0, 32)
        driver, cp = brownian_controlled(gen8, grid, seed=3)
        full = rough_convolution(driver, cp, 0, 32, gen8)
        mid = 20
        left = rough_convolution(driver, cp, 0, mid, gen8)
        right = rough_convolution(driver, cp, mid, 32, gen8)
        glued = apply_semigroup(float(grid[32] - grid[mid]), left, gen8) + right
        assert np.abs(full - glued).max() <= 1e-13

    def test_refinement_toward_classical_integral(self, gen8):
        # smooth driver: the compensated sum converges to the Riemann integral
        errors = []
        for n in (32, 64, 128):
            grid = make_grid(1.0, n)
            driver = rp.exact_linear_lift(grid, np.array([1.0]))
            x = driver.first[:, 0]
            value = np.sin(x)[:, None, None] * unit(0)
            deriv = np.cos(x)[:, None, None, None] * unit(0)
            cp = ControlledPath(grid=grid, value=value, deriv=deriv)
            out = rough_convolution(driver, cp, 0, n, None)
            errors.append(abs(out[0] - (1.0 - math.cos(1.0))))
        assert errors[2] < errors[1] < errors[0]
        assert errors[1] / errors[0] <= 0.6   # at least first order

    def test_rejects_bad_inputs(self, gen8):
        grid = make_grid(1.0, 8)
        driver = rp.exact_linear_lift(grid, np.array([1.0]))
        cp = ControlledPath(grid=grid, value=np.zeros((9, 1, 8)),
                            deriv=np.zeros((9, 1, 1, 8)))
        with pytest.raises(InvalidInputError):
            rough_convolution(driver, cp, 5, 5, gen8)
        state_valued = ControlledPath(grid=grid, value=np.zeros((9, 8)),
                                      deriv=np.zeros((9, 1, 8)))
        with pytest.raises(InvalidInputError):
            rough_convolution(driver, state_valued, 0, 8, gen8)


class TestComposeFunction:
    def test_identity_map(self, gen8, rng):
        grid = make_grid(1.0, 8)
        y = rng.standard_normal((9, 8))
        yp = rng.standard_normal((9, 1, 8))
        cp = ControlledPath(grid=grid, value=y, deriv=yp)
        out = compose_function(cp, lambda x: x[..., None, :],
                               lambda x, v: v[..., None, :])
        assert np.array_equal(out.value[:, 0], y)
        assert np.array_equal(out.deriv[:, 0, 0], yp[:, 0])

    def test_constant_map(self, gen8, rng):
        grid = make_grid(1.0, 8)
        cp = ControlledPath(grid=grid, value=rng.standard_normal((9, 8)),
                            deriv=rng.standard_normal((9, 1, 8)))
        const = np.ones((1, 8))
        out = compose_function(cp, lambda x: np.broadcast_to(const, x.shape[:-1] + (1, 8)),
                               lambda x, v: np.zeros(x.shape[:-1] + (1, 8)))
        assert np.abs(out.deriv).max() == 0.0
        assert np.allclose(out.value, np.ones((9, 1, 8)))

    def test_missing_derivative_rejected(self, gen8):
        grid = make_grid(1.0, 4)
        cp = ControlledPath(grid=grid, value=np.zeros((5, 8)),
                            deriv=np.zeros((5, 1, 8)))
        with pytest.raises(UnsupportedCoefficientError):
            compose_function(cp, lambda x: x[..., None, :], None)

    def test_finite_difference_gubinelli_check(self, gen8):
        # tanh readout of a smooth-driven path: the composed derivative must
        # predict increments to higher order than the increments themselves
        grid = make_grid(1.0, 256)
        driver = rp.exact_linear_lift(grid, np.array([1.0]))
        x = driver.first[:, 0]
        base = ControlledPath(grid=grid, value=np.outer(np.sin(x), unit(0)),
                              deriv=np.cos(x)[:, None, None] * unit(0))
        out = compose_function(
            base,
            lambda y: np.tanh(y[..., :1])[..., None, :] * unit(0),
            lambda y, v: ((1 - np.tanh(y[..., :1]) ** 2) * v[..., :1])[..., None, :]
            * unit(0))
        dx = np.diff(x)
        pred = np.einsum("ulkn,u->ukn", out.deriv[:-1], dx)
        real = np.diff(out.value, axis=0)
        resid = np.abs(real - pred).max()
        assert resid <= 5.0 * float(np.abs(dx).max()) ** 2 * 2.0


class TestSewingMidpoint:
    def test_midpoint_insertion_three_gamma(self, gen8):
        # inserting the stored midpoint into a two-step interval changes the
        # compensated sum by O(h^(3 gamma)); the constant measured on one
        # seed bounds another seed's defects with slack
        gamma = 0.4

        def defects(seed, n):
            grid = make_grid(1.0, n)
            driver, cp = brownian_controlled(gen8, grid, seed=seed)
            h = 2.0 / n
            out = []
            for u in range(0, n - 2, 2):
                coarse = rough_convolution(
                    rp.RoughPath(grid=grid[[u, u + 2]],
                                 first=driver.first[[u, u + 2]],
                                 second=np.array([rp.reconstruct_second_level(
                                     driver, u, u + 2)]),
                                 gamma=driver.gamma),
                    ControlledPath(grid=grid[[u, u + 2]],
                                   value=cp.value[[u, u + 2]],
                                   deriv=cp.deriv[[u, u + 2]]), 0, 1, gen8)
                fine = rough_convolution(driver, cp, u, u + 2, gen8)
                out.append(np.linalg.norm(coarse - fine) / h ** (3 * gamma))
            return np.array(out)

        ref = defects(seed=1, n=64).max()
        assert defects(seed=2, n=64).max() <= 5.0 * ref + 1e-12
        # constant does not blow up under refinement
        assert defects(seed=1, n=256).max() <= 5.0 * ref + 1e-12
