import math

import numpy as np
import pytest

from roughavg import roughpath as rp
from roughavg.coefficients import CoefficientSet, DissipativeOU, ZeroCoefficients
from roughavg.errors import BlowUpError, ConfigurationError
from roughavg.rng import Streams
from roughavg.solver import (XiBlocks, solve_fast_ito, solve_slow_fast,
                             step_slow_fast, verify_h4)
from roughavg.spectral import Generator, apply_semigroup, make_grid


class ConstantDrift(CoefficientSet):
    """Slow drift c, everything else zero: closed-form linear dynamics."""

    name = "constant-drift"
    g2_constant = True

    def __init__(self, gen, c_slow, c_fast=None):
        super().__init__(gen, d=1, m=1)
        self.c_slow = np.asarray(c_slow, dtype=np.float64)
        self.c_fast = np.zeros(gen.n_modes) if c_fast is None \
            else np.asarray(c_fast, dtype=np.float64)
        self.f1_bound = float(np.linalg.norm(self.c_slow))

    def f1(self, x, y):
        return np.broadcast_to(self.c_slow, np.asarray(x).shape).copy()

    def f2(self, x, y):
        return np.broadcast_to(self.c_fast, np.asarray(y).shape).copy()

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


class ConstantSlowNoise(ConstantDrift):
    """Adds a constant slow diffusion column on top of the constant drift."""

    name = "constant-noise"

    def __init__(self, gen, c_slow, g_col):
        super().__init__(gen, c_slow)
        self.g_col = np.asarray(g_col, dtype=np.float64)

    def g1_value(self, x):
        x = np.asarray(x)
        return np.broadcast_to(self.g_col, x.shape[:-1] + (1,) + self.g_col.shape).copy()


def zero_blocks(n, d, m):
    return XiBlocks(db=np.zeros((n, d)), dw=np.zeros((n, m)),
                    b2=np.zeros((n, d, d)), w2=np.zeros((n, m, m)),
                    ibw=np.zeros((n, d, m)))


def mixed_blocks(gen, grid, c, seed=5, fine=8, sample=0):
    bspec = rp.LiftSpec(kind="brownian_strat", fine_factor=fine, seed=seed)
    wspec = rp.LiftSpec(kind="brownian_ito", fine_factor=fine, seed=seed)
    b, bf = rp.lift_brownian(bspec, grid, c.d, sample_index=sample,
                             stream=Streams.SLOW_DRIVER, return_fine=True)
    w, wf = rp.lift_brownian(wspec, grid, c.m, sample_index=sample,
                             stream=Streams.FAST_DRIVER, return_fine=True)
    xi = rp.join_mixed(b, w, bf, wf)
    return XiBlocks.from_mixed(xi, c.d, c.m), b, w


class TestFreeFlow:
    def test_zero_coefficients_semigroup_orbit(self, gen8, rng):
        c = ZeroCoefficients(gen8)
        grid = make_grid(1.0, 64)
        x0 = rng.standard_normal(8)
        y0 = rng.standard_normal(8)
        paths = solve_slow_fast(x0, y0, c, gen8, zero_blocks(64, 1, 1), grid, eps=1.0)
        for k, t in enumerate(grid):
            assert np.allclose(paths.slow[k], apply_semigroup(t, x0, gen8),
                               atol=1e-13)
            assert np.allclose(paths.fast[k], apply_semigroup(t, y0, gen8),
                               atol=1e-13)

    def test_fast_timescale_free_flow(self, gen8, rng):
        c = ZeroCoefficients(gen8)
        grid = make_grid(1.0, 16)
        y0 = rng.standard_normal(8)
        paths = solve_slow_fast(np.zeros(8), y0, c, gen8, zero_blocks(16, 1, 1),
                                grid, eps=0.25)
        assert np.allclose(paths.fast[-1], apply_semigroup(4.0, y0, gen8),
                           atol=1e-13)


class TestClosedForms:
    def test_constant_drift_convolution(self, gen8):
        c_vec = np.ones(8) * 0.7
        c = ConstantDrift(gen8, c_vec)
        x0 = np.zeros(8)
        lam = gen8.eigenvalues
        errs = []
        for n in (128, 256):
            grid = make_grid(1.0, n)
            paths = solve_slow_fast(x0, np.zeros(8), c, gen8,
                                    zero_blocks(n, 1, 1), grid, eps=1.0)
            want = c_vec * (1.0 - np.exp(-lam)) / lam
            errs.append(np.abs(paths.slow[-1] - want).max())
        assert errs[0] <= 2.0 * 0.7 / 128          # O(h)
        assert errs[1] <= 0.6 * errs[0]

    def test_constant_g1_with_linear_driver(self, gen8):
        # smooth unit-velocity driver turns the noise column into extra drift
        g_col = 0.4 * np.exp(-np.arange(8) / 2.0)
        c = ConstantSlowNoise(gen8, np.zeros(8), g_col)
        n = 256
        grid = make_grid(1.0, n)
        lin = rp.exact_linear_lift(grid, np.array([1.0]))
        blocks = XiBlocks(db=np.diff(lin.first, axis=0), dw=np.zeros((n, 1)),
                          b2=lin.second, w2=np.zeros((n, 1, 1)),
                          ibw=np.zeros((n, 1, 1)))
        paths = solve_slow_fast(np.zeros(8), np.zeros(8), c, gen8, blocks, grid,
                                eps=1.0)
        lam = gen8.eigenvalues
        want = g_col * (1.0 - np.exp(-lam)) / lam
        assert np.abs(paths.slow[-1] - want).max() <= 3.0 * 0.4 / n

    def test_fast_ito_constant_drift(self, gen8):
        c_fast = np.ones(8) * 0.3
        c = ConstantDrift(gen8, np.zeros(8), c_fast)
        n, eps = 512, 0.5
        grid = make_grid(1.0, n)
        out = solve_fast_ito(np.zeros(8), np.zeros(8), c, gen8,
                             np.zeros((n, 1)), grid, eps)
        lam = gen8.eigenvalues
        want = c_fast * (1.0 - np.exp(-lam / eps)) / lam  # (1/eps) f2 against lam/eps
        assert np.abs(out[-1] - want).max() <= 2e-3


class TestSchemeStructure:
    def test_degenerates_to_exponential_euler(self, gen8, rng):
        c = DissipativeOU(Generator.dirichlet_laplacian(8), d=2, m=2)
        x = rng.standard_normal(8) * 0.3
        y = rng.standard_normal(8) * 0.3
        h, eps = 1.0 / 64, 0.1
        db, dw = rng.standard_normal(2) * 0.1, rng.standard_normal(2) * 0.1
        x2, y2 = step_slow_fast(x, y, c, gen8, db, np.zeros((2, 2)), dw,
                                np.zeros((2, 2)), np.zeros((2, 2)), eps, h)
        sx = gen8.semigroup_factors(h)
        sy = gen8.semigroup_factors(h / eps)
        want_x = sx * (x + h * c.f1(x, y) + c.g1_value(x).T @ db
                       + np.einsum("lkn,lk->n", c.g1_levy(x), np.zeros((2, 2))))
        want_y = sy * (y + h / eps * c.f2(x, y)
                       + c.g2_value(x, y).T @ dw / math.sqrt(eps))
        assert np.allclose(x2, want_x, atol=1e-15)
        assert np.allclose(y2, want_y, atol=1e-15)

    def test_zero_fast_noise_matches_ito_solver_exactly(self, gen8):
        c = DissipativeOU(gen8, d=2, m=2, sigma2=0.0)
        grid = make_grid(1.0, 128)
        blocks, _, _ = mixed_blocks(gen8, grid, c, seed=8)
        x0 = 0.4 * np.exp(-np.arange(8) / 2.0)
        paths = solve_slow_fast(x0, np.zeros(8), c, gen8, blocks, grid, eps=0.05)
        ito = solve_fast_ito(paths.slow, np.zeros(8), c, gen8, blocks.dw, grid,
                             eps=0.05)
        assert np.abs(paths.fast - ito).max() <= 1e-12

    def test_deterministic_replay(self, gen8):
        c = DissipativeOU(gen8, d=2, m=2)
        grid = make_grid(1.0, 64)
        blocks, _, _ = mixed_blocks(gen8, grid, c, seed=9)
        x0 = 0.2 * np.ones(8)
        a = solve_slow_fast(x0, np.zeros(8), c, gen8, blocks, grid, eps=0.1)
        b = solve_slow_fast(x0, np.zeros(8), c, gen8, blocks, grid, eps=0.1)
        assert np.array_equal(a.slow, b.slow)
        assert np.array_equal(a.fast, b.fast)


class TestGuards:
    def test_h4_violation_is_configuration_error(self, gen8):
        c = ZeroCoefficients(gen8)
        c.lip_f2 = 2.0
        with pytest.raises(ConfigurationError):
            solve_slow_fast(np.zeros(8), np.zeros(8), c, gen8,
                            zero_blocks(4, 1, 1), make_grid(1.0, 4), eps=1.0)

    def test_blow_up_names_the_step(self, gen8):
        c = ConstantDrift(gen8, np.full(8, 1.7e308))
        c.f1_bound = math.inf
        with np.errstate(over="ignore"), pytest.raises(BlowUpError) as err:
            solve_slow_fast(np.zeros(8), np.zeros(8), c, gen8,
                            zero_blocks(8, 1, 1), make_grid(8.0, 8), eps=1.0)
        assert err.value.step is not None

    def test_declared_bound_enforced_each_step(self, gen8):
        c = ConstantDrift(gen8, np.ones(8))
        c.f1_bound = 0.1  # falsely declared; the solver must notice
        with pytest.raises(BlowUpError):
            solve_slow_fast(np.zeros(8), np.zeros(8), c, gen8,
                            zero_blocks(4, 1, 1), make_grid(1.0, 4), eps=1.0)

    def test_step_rejects_nonpositive_parameters(self, gen8):
        c = ZeroCoefficients(gen8)
        with pytest.raises(Exception):
            step_slow_fast(np.zeros(8), np.zeros(8), c, gen8, np.zeros(1),
                           np.zeros((1, 1)), np.zeros(1), np.zeros((1, 1)),
                           np.zeros((1, 1)), eps=0.0, h=0.1)


class TestRefinement:
    def test_mean_square_self_consistency(self, gen8):
        # solutions on n and 2n grids (same driver restricted) get closer
        from roughavg.rng import stream_generator

        c = DissipativeOU(gen8, d=2, m=2)
        x0 = 0.4 * np.exp(-np.arange(8) / 2.0)
        n_master, f_master = 512, 4
        solutions = {}
        for n in (128, 256, 512):
            grid = make_grid(1.0, n)
            factor = n_master // n
            rng_b = stream_generator(77, 0, Streams.SLOW_DRIVER)
            rng_w = stream_generator(77, 0, Streams.FAST_DRIVER)
            scale = math.sqrt(1.0 / (n_master * f_master))
            bf = rng_b.standard_normal((n_master, f_master, 2)) * scale
            wf = rng_w.standard_normal((n_master, f_master, 2)) * scale
            bf = bf.reshape(n, factor * f_master, 2)
            wf = wf.reshape(n, factor * f_master, 2)
            b = rp.lift_from_increments(grid, bf, trapezoid=True)
            w = rp.lift_from_increments(grid, wf, trapezoid=False)
            xi = rp.join_mixed(b, w, bf, wf)
            blocks = XiBlocks.from_mixed(xi, 2, 2)
            solutions[n] = solve_slow_fast(x0, np.zeros(8), c, gen8, blocks,
                                           grid, eps=0.1).slow
        gap_coarse = np.abs(solutions[128] - solutions[256][::2]).max()
        gap_fine = np.abs(solutions[256] - solutions[512][::2]).max()
        assert gap_fine < gap_coarse

    def test_fast_moment_stable_across_scales(self, gen8):
        # E sup_t |Y|^4 stays finite and of one magnitude as eps shrinks
        c = DissipativeOU(gen8, d=2, m=2)
        x0 = 0.4 * np.exp(-np.arange(8) / 2.0)
        stats = {}
        for eps in (1e-1, 1e-2):
            sups = []
            for s in range(16):
                grid = make_grid(1.0, 256)
                blocks, _, _ = mixed_blocks(gen8, grid, c, seed=31, sample=s)
                paths = solve_slow_fast(x0, np.zeros(8), c, gen8, blocks, grid,
                                        eps=eps)
                sq = np.einsum("tn,tn->t", paths.fast, paths.fast)
                sups.append(float((sq ** 2).max()))
            stats[eps] = float(np.mean(sups))
        assert all(np.isfinite(v) for v in stats.values())
        ratio = stats[1e-2] / stats[1e-1]
        assert 1.0 / 5.0 <= ratio <= 5.0

    def test_fast_solver_batch_matches_loop(self, gen8, rng):
        c = DissipativeOU(gen8, d=2, m=2)
        grid = make_grid(1.0, 32)
        dw = rng.standard_normal((3, 32, 2)) * math.sqrt(1.0 / 32)
        y0 = rng.standard_normal((3, 8))
        x = rng.standard_normal(8)
        batch = solve_fast_ito(x, y0, c, gen8, dw, grid, eps=0.2)
        for k in range(3):
            single = solve_fast_ito(x, y0[k], c, gen8, dw[k], grid, eps=0.2)
            assert np.allclose(batch[:, k], single, atol=1e-14)
