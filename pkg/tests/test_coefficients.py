import math

import numpy as np
import pytest

from roughavg.coefficients import (BoundedNemytskii, DissipativeOU,
                                   ZeroCoefficients, make_coefficients)
from roughavg.errors import InvalidInputError
from roughavg.solver import verify_h4
from roughavg.spectral import Generator


@pytest.fixture(scope="module")
def dou(gen32):
    return DissipativeOU(gen32)


@pytest.fixture(scope="module")
def nem(gen32):
    return BoundedNemytskii(gen32)


@pytest.fixture(scope="session")
def gen32():
    return Generator.dirichlet_laplacian(32)


class FakeConstants:
    """Bare constants holder for the dissipativity margin check."""

    def __init__(self, lip_f2, lip_g2):
        self.lip_f2 = lip_f2
        self.lip_g2 = lip_g2


class TestH4:
    def test_margin_example(self, gen32):
        out = verify_h4(FakeConstants(0.1, 0.1), gen32)
        assert out.passed and out.margin == pytest.approx(0.87)

    def test_boundary_is_strict(self, gen32):
        out = verify_h4(FakeConstants(1.0, 0.0), gen32)
        assert not out.passed and out.margin == 0.0

    def test_large_diffusion_fails(self, gen32):
        out = verify_h4(FakeConstants(0.0, 1.0), gen32)
        assert not out.passed and out.margin == pytest.approx(-2.0)

    def test_builtins_have_margin(self, gen32, dou, nem):
        assert verify_h4(dou, gen32).margin >= 0.5 - 1e-12
        assert verify_h4(nem, gen32).margin >= 0.5


def lipschitz_probe_y(c, rng, n_pairs=200, extremal=()):
    """Largest observed fast-variable difference quotient of f2 and g2."""
    n = c.gen.n_modes
    best_f, best_g = 0.0, 0.0
    pairs = []
    for _ in range(n_pairs):
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        dy = rng.standard_normal(n) * 10.0 ** rng.uniform(-4, 0)
        pairs.append((x, y, y + dy))
    pairs.extend(extremal)
    for x, y1, y2 in pairs:
        dy = np.linalg.norm(y1 - y2)
        if dy == 0:
            continue
        best_f = max(best_f, np.linalg.norm(c.f2(x, y1) - c.f2(x, y2)) / dy)
        gdiff = c.g2_value(x, y1) - c.g2_value(x, y2)
        best_g = max(best_g, math.sqrt(float(np.sum(gdiff * gdiff))) / dy)
    return best_f, best_g


class TestDeclaredConstants:
    def test_dissipative_ou_lipschitz(self, dou, rng):
        best_f, best_g = lipschitz_probe_y(dou, rng)
        assert best_g == 0.0 and dou.lip_g2 == 0.0
        # linear fast drift: the quotient equals kappa wherever dy is supported
        assert best_f <= dou.lip_f2 * (1 + 1e-9)
        assert dou.lip_f2 <= best_f * 1.1

    def test_bounded_nemytskii_lipschitz(self, nem, rng):
        n = nem.gen.n_modes
        # extremal probes: steepest tanh slope at the origin with the slow
        # modulation saturated, and the tanh^2 slope maximum along xi_0
        x_big = 50.0 * nem._x_probe
        eps = 1e-4
        extremal = [(x_big, eps * np.eye(n)[0], -eps * np.eye(n)[0])]
        zstar = math.atanh(1.0 / math.sqrt(3.0))
        y_star = zstar * nem._xi[0]
        extremal.append((np.zeros(n), y_star + eps * nem._xi[0],
                         y_star - eps * nem._xi[0]))
        best_f, best_g = lipschitz_probe_y(nem, rng, extremal=extremal)
        assert best_f <= nem.lip_f2 * (1 + 1e-6)
        assert nem.lip_f2 <= best_f * 1.1
        assert best_g <= nem.lip_g2 * (1 + 1e-6)
        assert nem.lip_g2 <= best_g * 1.1

    def test_nemytskii_slow_drift_bound(self, nem, rng):
        for _ in range(100):
            x = rng.standard_normal(32) * 10.0
            y = rng.standard_normal(32) * 10.0
            assert np.linalg.norm(nem.f1(x, y)) <= nem.f1_bound * (1 + 1e-12)

    def test_dissipative_ou_unbounded_flagged(self, dou):
        assert math.isinf(dou.f1_bound)


class TestStructure:
    def test_nemytskii_fast_drift_odd(self, nem, rng):
        x = rng.standard_normal(32)
        y = rng.standard_normal(32)
        assert np.allclose(nem.f2(x, -y), -nem.f2(x, y), atol=1e-14)

    def test_nemytskii_fast_diffusion_even(self, nem, rng):
        x = rng.standard_normal(32)
        y = rng.standard_normal(32)
        assert np.allclose(nem.g2_value(x, -y), nem.g2_value(x, y), atol=1e-14)

    def test_nemytskii_slow_drift_splits(self, nem, rng):
        # even part in y is exactly f(x): the averaged drift closed form
        x = rng.standard_normal(32)
        y = rng.standard_normal(32)
        even = 0.5 * (nem.f1(x, y) + nem.f1(x, -y))
        assert np.allclose(even, nem.averaged_f1(x), atol=1e-14)

    def test_ou_averaged_closed_form(self, dou, gen32, rng):
        x = rng.standard_normal(32)
        mean = dou.invariant_mean(x)
        assert np.allclose(mean * (gen32.eigenvalues + dou.kappa),
                           dou.f2(x, np.zeros(32)), atol=1e-14)
        want = dou.f1(x, np.zeros(32)) + dou._p_apply(mean)
        assert np.allclose(dou.averaged_f1(x), want, atol=1e-14)

    def test_batched_evaluation_matches_loop(self, nem, rng):
        xs = rng.standard_normal((5, 32))
        ys = rng.standard_normal((5, 32))
        batch = nem.f1(xs, ys)
        for k in range(5):
            assert np.allclose(batch[k], nem.f1(xs[k], ys[k]), atol=1e-15)
        batch_g = nem.g2_value(xs, ys)
        assert batch_g.shape == (5, nem.m, 32)
        for k in range(5):
            assert np.allclose(batch_g[k], nem.g2_value(xs[k], ys[k]), atol=1e-15)


def finite_difference_apply(fn, x, v, eps=1e-6):
    return (fn(x + eps * v) - fn(x - eps * v)) / (2 * eps)


class TestDerivativeRegistration:
    def test_g1_levy_matches_finite_differences(self, dou, rng):
        x = rng.standard_normal(32) * 0.5
        levy = dou.g1_levy(x)
        g1 = dou.g1_value(x)
        for l in range(dou.d):
            fd = finite_difference_apply(dou.g1_value, x, g1[l])
            assert np.allclose(levy[l], fd, atol=1e-7)

    def test_g2_partials_match_finite_differences(self, nem, rng):
        x = rng.standard_normal(32) * 0.5
        y = rng.standard_normal(32) * 0.5
        v = rng.standard_normal(32)
        fd_x = finite_difference_apply(lambda z: nem.g2_value(z, y), x, v)
        assert np.allclose(nem.g2_deriv_x(x, y, v), fd_x, atol=1e-7)
        fd_y = finite_difference_apply(lambda z: nem.g2_value(x, z), y, v)
        assert np.allclose(nem.g2_deriv_y(x, y, v), fd_y, atol=1e-7)

    def test_g2_contractions_consistent(self, nem, rng):
        x = rng.standard_normal(32) * 0.5
        y = rng.standard_normal(32) * 0.5
        levy = nem.g2_levy_y(x, y)
        g2 = nem.g2_value(x, y)
        for jp in range(nem.m):
            assert np.allclose(levy[jp], nem.g2_deriv_y(x, y, g2[jp]), atol=1e-14)
        cross = nem.g2_cross(x, y)
        g1 = nem.g1_value(x)
        for l in range(nem.d):
            assert np.allclose(cross[l], nem.g2_deriv_x(x, y, g1[l]), atol=1e-14)

    def test_constant_g2_contractions_vanish(self, dou, rng):
        x = rng.standard_normal(32)
        y = rng.standard_normal(32)
        assert np.abs(dou.g2_levy_y(x, y)).max() == 0.0
        assert np.abs(dou.g2_cross(x, y)).max() == 0.0


class TestFactory:
    def test_known_names(self, gen32):
        for name in ("dissipative-ou", "bounded-nemytskii", "zero"):
            c = make_coefficients(name, gen32)
            assert c.name == name

    def test_parameters_forwarded(self, gen32):
        c = make_coefficients("dissipative-ou", gen32, kappa=0.3, rank=4)
        assert c.kappa == 0.3 and c.rank == 4

    def test_unknown_name_rejected(self, gen32):
        with pytest.raises(InvalidInputError):
            make_coefficients("nope", gen32)

    def test_bad_parameter_rejected(self, gen32):
        with pytest.raises(InvalidInputError):
            make_coefficients("dissipative-ou", gen32, frobnicate=1.0)
        with pytest.raises(InvalidInputError):
            make_coefficients("dissipative-ou", gen32, kappa=2.0)

    def test_zero_set_margin_is_lambda1(self, gen32):
        assert verify_h4(ZeroCoefficients(gen32), gen32).margin == 1.0
