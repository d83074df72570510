import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from kdeconv.exceptions import InvalidParam, OutOfDomain, ValidationError
from kdeconv.grid import (
    Grid,
    GridFunction,
    antiderivative,
    convolve,
    cumulative,
    forward_transform,
    integrate,
    interpolate,
    inverse_transform,
)

GAUSS = Grid(-20.0, 20.0, 1024)


def gauss_fn(grid=GAUSS):
    return GridFunction.sample(grid, stats.norm.pdf)


class TestGrid:
    def test_step_and_dual(self):
        g = Grid(-1.0, 3.0, 64)
        assert g.step == pytest.approx(4 / 64)
        u = g.dual().nodes()
        assert np.allclose(np.diff(u), 2 * np.pi / (g.m * g.step))
        assert u[0] == pytest.approx(-np.pi / g.step)
        assert u[-1] < np.pi / g.step

    @pytest.mark.parametrize("m", [4, 12, 100, 0])
    def test_bad_size(self, m):
        with pytest.raises(InvalidParam):
            Grid(0.0, 1.0, m)

    def test_bad_interval(self):
        with pytest.raises(InvalidParam):
            Grid(1.0, 1.0, 8)

    def test_real_tag_rejects_imaginary(self):
        with pytest.raises(ValidationError):
            GridFunction(Grid(0, 1, 8), np.full(8, 1j), real=True)

    def test_length_checked(self):
        with pytest.raises(InvalidParam):
            GridFunction(Grid(0, 1, 8), np.zeros(7))


class TestTransforms:
    def test_gaussian_spectrum(self):
        F = forward_transform(gauss_fn())
        u = F.nodes()
        assert np.max(np.abs(F.values - np.exp(-u**2 / 2))) < 1e-8

    def test_exponential_spectrum(self):
        g = Grid(0.0, 40.0, 2**16)
        x = g.nodes()
        v = np.exp(-x)
        v[0] = 0.5  # midpoint value at the jump
        F = forward_transform(GridFunction(g, v, real=True))
        u = F.nodes()
        band = np.abs(u) < 20
        assert np.max(np.abs(F.values - 1 / (1 - 1j * u))[band]) < 1e-3

    def test_zero(self):
        F = forward_transform(GridFunction(GAUSS, np.zeros(GAUSS.m), real=True))
        assert not np.any(F.values)
        assert not np.any(inverse_transform(F).values)

    def test_round_trip(self):
        f = gauss_fn()
        back = inverse_transform(forward_transform(f), real=True)
        assert np.max(np.abs(back.values - f.values)) < 1e-10 * np.max(f.values)

    def test_inverse_of_exponential_cf(self):
        g = Grid(0.0, 40.0, 2**16)
        F = GridFunction.spectrum(g, lambda u: 1 / (1 - 1j * u))
        f = inverse_transform(F, real=False)
        x = g.nodes()
        away = (x > 0.5) & (x < 30)
        assert np.max(np.abs(f.values.real - np.exp(-x))[away]) < 1e-3

    def test_plancherel(self):
        f = gauss_fn()
        F = forward_transform(f)
        lhs = GAUSS.step * np.sum(np.abs(f.values) ** 2)
        rhs = GAUSS.freq_step / (2 * np.pi) * np.sum(np.abs(F.values) ** 2)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31 - 1))
    def test_linearity(self, a, b, seed):
        r = np.random.default_rng(seed)
        f, g = r.normal(size=64), r.normal(size=64)
        grid = Grid(-2.0, 5.0, 64)
        lhs = forward_transform(GridFunction(grid, a * f + b * g)).values
        rhs = a * forward_transform(GridFunction(grid, f)).values + b * forward_transform(GridFunction(grid, g)).values
        assert np.allclose(lhs, rhs, atol=1e-12 * (1 + np.max(np.abs(rhs))))

    def test_wrong_direction(self):
        with pytest.raises(ValidationError):
            inverse_transform(gauss_fn())
        with pytest.raises(ValidationError):
            forward_transform(forward_transform(gauss_fn()))


class TestInterpolate:
    def test_node_exact(self):
        f = gauss_fn()
        x = GAUSS.nodes()[100:110]
        assert np.array_equal(interpolate(f, x), f.values[100:110])

    def test_fourth_order(self):
        errs = []
        for m in (256, 512):
            g = Grid(-20.0, 20.0, m)
            x = np.linspace(-5, 5, 777)
            errs.append(np.max(np.abs(interpolate(gauss_fn(g), x) - stats.norm.pdf(x))))
        assert errs[0] / errs[1] > 12

    @given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.floats(-3.9, 3.9))
    def test_cubic_exact(self, c, x):
        g = Grid(-8.0, 8.0, 64)
        p = np.polynomial.Polynomial(c)
        f = GridFunction.sample(g, p)
        assert interpolate(f, x) == pytest.approx(p(x), abs=1e-9 * (1 + abs(p(x))))

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            interpolate(gauss_fn(), GAUSS.hi + 1)

    def test_scalar_in_scalar_out(self):
        assert np.ndim(gauss_fn()(0.3)) == 0


class TestQuadrature:
    def test_gaussian_mass(self):
        assert integrate(gauss_fn()) == pytest.approx(1.0, abs=1e-9)

    def test_constant(self):
        g = Grid(-1.0, 2.0, 16)
        assert integrate(GridFunction(g, np.full(16, 2.5))) == pytest.approx(7.5)

    def test_gamma_mass(self):
        # the kink at 0 limits the trapezoid rule to step**2/12
        g = Grid(0.0, 60.0, 2**18)
        f = GridFunction.sample(g, stats.gamma(2).pdf)
        assert integrate(f) == pytest.approx(1.0, abs=1e-8)

    def test_cumulative_identity(self):
        g = Grid(0.0, 1.0, 64)
        F = cumulative(GridFunction(g, np.ones(64), real=True))
        assert np.allclose(F.values, g.nodes() - g.lo)

    def test_cumulative_normal_cdf(self):
        F = cumulative(gauss_fn())
        assert np.max(np.abs(F.values - stats.norm.cdf(GAUSS.nodes()))) < 1e-7

    def test_cumulative_zero(self):
        F = cumulative(GridFunction(GAUSS, np.zeros(GAUSS.m), real=True))
        assert not np.any(F.values)

    @given(st.integers(0, 2**31 - 1))
    def test_cumulative_monotone(self, seed):
        v = np.random.default_rng(seed).uniform(0, 1, 64)
        # the fourth-order cell rule is monotone when neighbours are comparable
        v = np.convolve(np.r_[v[-3:], v, v[:3]], np.ones(7) / 7, "valid")
        F = cumulative(GridFunction(Grid(0, 1, 64), v, real=True))
        assert np.all(np.diff(F.values) >= 0)

    def test_antiderivative_matches_cumulative_at_nodes(self):
        f = gauss_fn()
        x = GAUSS.nodes()[::37]
        assert np.allclose(antiderivative(f, x), cumulative(f).values[::37], atol=1e-14)

    def test_antiderivative_between_nodes(self):
        x = np.linspace(-4, 4, 301)
        assert np.max(np.abs(antiderivative(gauss_fn(), x) - stats.norm.cdf(x))) < 1e-7


class TestConvolve:
    def test_convolution_theorem(self):
        g = Grid(-16.0, 16.0, 512)
        a = GridFunction.sample(g, stats.norm(0, 0.7).pdf)
        b = GridFunction.sample(g, stats.norm(1, 0.5).pdf)
        c = convolve(a, b)
        x = c.grid.nodes()
        ref = stats.norm(1, np.hypot(0.7, 0.5)).pdf(x)
        assert np.max(np.abs(c.values - ref)) < 1e-8

    def test_spectral_product(self):
        g = Grid(-16.0, 16.0, 512)
        a = GridFunction.sample(g, stats.norm(0, 0.7).pdf)
        b = GridFunction.sample(g, stats.norm(1, 0.5).pdf)
        c = convolve(a, b)
        Fc = forward_transform(c)
        u = Fc.nodes()
        ref = np.exp(1j * u - (0.49 + 0.25) * u**2 / 2)
        assert np.max(np.abs(Fc.values - ref)) < 1e-8

    def test_mismatched(self):
        with pytest.raises(ValidationError):
            convolve(gauss_fn(), gauss_fn(Grid(-20, 20, 512)))
