import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from kdeconv.error_models import ErrorModel, gamma_error, laplace_error, no_noise
from kdeconv.estimator import (
    EstimateCurve,
    Sample,
    bandwidth_classical,
    bandwidth_rate,
    default_t_grid,
    density_estimate,
    empirical_cf,
    estimate_functional,
    estimate_functional_direct,
    estimation_grid,
    rho_condition,
    weight_function,
)
from kdeconv.exceptions import (
    AdmissibilityWarning,
    CFVanishes,
    InvalidBandwidth,
    InvalidExponent,
    InvalidParam,
    OutOfDomain,
    UnsupportedRoute,
)
from kdeconv.functionals import flipped_gamma, gaussian, indicator, triangle
from kdeconv.grid import Grid, GridFunction, integrate as grid_integrate
from kdeconv.limit_process import covariance_plugin, influence_function


class TestSample:
    def test_flattens_and_freezes(self):
        s = Sample([[1.0, 2.0]])
        assert s.n == 2
        with pytest.raises(ValueError):
            s.y[0] = 5

    @pytest.mark.parametrize("bad", [[], [1.0, np.nan], [np.inf]])
    def test_rejects(self, bad):
        with pytest.raises(InvalidParam):
            Sample(bad)


class TestEmpiricalCF:
    grid = Grid(-8.0, 8.0, 256)

    def test_single_point_at_zero(self):
        assert np.allclose(empirical_cf(Sample([0.0]), self.grid).values, 1.0)

    @given(st.floats(-100, 100))
    def test_unit_modulus(self, a):
        assert np.allclose(np.abs(empirical_cf(Sample([a]), self.grid).values), 1.0)

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=30))
    def test_origin_and_hermitian(self, y):
        phi = empirical_cf(Sample(y), self.grid).values
        m = self.grid.m
        assert phi[m // 2] == pytest.approx(1.0)
        # nodes j and m - j are u and -u around the centre node m/2
        assert np.allclose(phi[1:], np.conj(phi[1:][::-1]))

    def test_normal_sample(self):
        y = np.random.default_rng(0).normal(size=100_000)
        g = Grid(-3.0, 3.0, 64)
        phi = empirical_cf(Sample(y), g)
        u = g.nodes()
        assert np.max(np.abs(phi.values - np.exp(-u**2 / 2))) < 0.02


class TestDensityEstimate:
    def test_no_noise_is_kde(self, kernel):
        y = np.random.default_rng(1).normal(size=200)
        s = Sample(y)
        h = 0.4
        g = estimation_grid(y, no_noise(), gaussian(1.0), h)
        d = density_estimate(s, no_noise(), kernel, h, g)
        idx = np.flatnonzero(np.abs(g.nodes()) < 3)[::7]
        x = g.nodes()[idx]
        direct = kernel.values((x[:, None] - y[None, :]) / h).mean(axis=1) / h
        assert np.max(np.abs(d.f_hat.values[idx] - direct)) < 1e-8

    def test_real_and_mass(self, kernel):
        y = np.random.default_rng(2).gamma(2, size=500) + np.random.default_rng(3).gamma(0.3, size=500)
        g = estimation_grid(y, gamma_error(0.3), indicator(), 0.2)
        d = density_estimate(Sample(y), gamma_error(0.3), kernel, 0.2, g)
        assert d.f_hat.real  # imaginary part passed the 1e-9 real-tag check
        assert 0.9 < d.mass < 1.1

    def test_bad_bandwidth(self, kernel):
        g = Grid(-10, 10, 256)
        for h in (0.0, -1.0, 0.01):
            with pytest.raises(InvalidBandwidth):
                density_estimate(Sample([0.0, 1.0]), no_noise(), kernel, h, g)

    def test_cf_vanishes(self, kernel):
        em = laplace_error(1.0)
        dead = ErrorModel("dead", 2.0, lambda u: 1e-13 * em.cf(u), em.cf_recip, em.cf_recip_deriv,
                          em.density, em.sampler, 0.0, 2.0, {"kind": "dead"})
        with pytest.raises(CFVanishes):
            density_estimate(Sample([0.0, 1.0]), dead, kernel, 0.5, Grid(-20, 20, 1024))

    def test_sample_outside_grid(self, kernel):
        with pytest.raises(OutOfDomain):
            density_estimate(Sample([0.0, 50.0]), no_noise(), kernel, 0.5, Grid(-20, 20, 1024))

    @pytest.mark.slow
    def test_mise_decreases(self, kernel):
        em = gamma_error(0.3, 1.0)
        fx = stats.gamma(2.0)
        wins = 0
        for seed in range(50):
            ise = []
            for n in (1000, 10_000):
                r = np.random.default_rng([seed, n])
                y = r.gamma(2.0, size=n) + r.gamma(0.3, size=n)
                h = bandwidth_classical(n, 1.49, 0.3)
                g = Grid(-20.0, 40.0, 2**12)
                f = density_estimate(Sample(y), em, kernel, h, g).f_hat
                ise.append(grid_integrate(f.with_values((f.values - fx.pdf(g.nodes())) ** 2)))
            wins += ise[1] < ise[0]
        assert wins >= 45


class TestRouteA:
    def test_zero_density(self, kernel):
        g = Grid(-20, 20, 1024)
        d = density_estimate(Sample([0.0]), no_noise(), kernel, 0.5, g)
        zero = type(d)(d.f_hat.with_values(np.zeros(g.m)), d.spectrum.with_values(np.zeros(g.m)), d.h, d.n)
        for f in (indicator(), triangle(1.0), gaussian(1.0)):
            assert not np.any(estimate_functional(zero, f, [-1.0, 0.0, 2.0]).theta_hat)

    def test_t_outside(self, kernel):
        g = Grid(-20, 20, 1024)
        d = density_estimate(Sample([0.0]), no_noise(), kernel, 0.5, g)
        with pytest.raises(OutOfDomain):
            estimate_functional(d, triangle(), [30.0])

    def test_cdf_shift_equivariance(self, kernel):
        y = np.random.default_rng(4).normal(size=300)
        c = 3 * 0.0078125  # a multiple of the grid step keeps nodes aligned
        em = gamma_error(0.4)
        g = Grid(-16.0, 16.0, 4096)
        g2 = Grid(-16.0 + c, 16.0 + c, 4096)
        t = np.linspace(-2, 2, 9)
        a = estimate_functional(density_estimate(Sample(y), em, kernel, 0.3, g), indicator(), t)
        b = estimate_functional(density_estimate(Sample(y + c), em, kernel, 0.3, g2), indicator(), t + c)
        assert np.allclose(a.theta_hat, b.theta_hat, atol=1e-12)

    @given(st.floats(0.2, 1.0))
    def test_continuous_in_h(self, h):
        y = np.random.default_rng(5).normal(size=100)
        k = _kernel()
        g = Grid(-30.0, 30.0, 2048)
        em = laplace_error(0.3)
        th = [estimate_functional(density_estimate(Sample(y), em, k, hh, g), f, [0.3]).theta_hat[0]
              for hh in (h, h * (1 + 1e-7)) for f in (indicator(),)]
        assert abs(th[0] - th[1]) < 1e-5

    @pytest.mark.slow
    def test_gaussian_functional_laplace_errors(self, kernel):
        r = np.random.default_rng(6)
        n = 10_000
        em = laplace_error(0.5)
        y = r.normal(size=n) + em.sample(r, n)
        s = Sample(y)
        f = gaussian(1.0)
        h = 0.25  # smoothing bias at h = 0.5 is about 0.007, above the standard error
        g = estimation_grid(y, em, f, h, t_grid=[0.0])
        curve = estimate_functional(density_estimate(s, em, kernel, h, g), f, [0.0])
        inf = influence_function(f, em, Grid(-40.0, 40.0, 2**13))
        se = np.sqrt(covariance_plugin(inf, s, curve).sigma[0, 0] / n)
        assert abs(curve.theta_hat[0] - 1 / (2 * np.sqrt(np.pi))) < 3 * se


def _kernel():
    from kdeconv.kernels import build_flat_top

    return build_flat_top(0.5)


class TestRouteB:
    def test_indicator_unsupported(self, kernel):
        with pytest.raises(UnsupportedRoute):
            estimate_functional_direct(Sample([0.0]), no_noise(), kernel, indicator(), 0.5, [0.0])

    def test_single_point(self, kernel):
        f, em, h = triangle(1.0), gamma_error(0.3), 0.5
        c = estimate_functional_direct(Sample([0.0]), em, kernel, f, h, [0.0])
        g = Grid(-400.0, 400.0, 2**17)
        w = weight_function(em, kernel, f, h, g)
        assert c.theta_hat[0] == pytest.approx(float(w(0.0)), abs=1e-9)

    def test_no_noise_weight_is_smoothed_zeta(self, kernel):
        f, h = gaussian(1.0), 0.7
        w = weight_function(no_noise(), kernel, f, h, Grid(-400.0, 400.0, 2**16))
        for x in (0.0, 0.8, -2.5):
            # (zeta * K_h)(x) as an inverse transform of exp(-u^2/2) FK(hu) by quadrature
            direct = integrate.quad(lambda u: np.cos(u * x) * np.exp(-u * u / 2) * kernel.ft(h * u),
                                    0, 1 / h, epsabs=1e-14)[0] / np.pi
            assert w(x) == pytest.approx(direct, abs=1e-8)

    def test_routes_agree(self, kernel):
        r = np.random.default_rng(8)
        n = 1000
        em = gamma_error(0.3, 1.0)
        y = r.normal(size=n) + em.sample(r, n)
        f, h = triangle(1.0), 0.3
        t = default_t_grid(y, 11, 0.1, 0.9)
        g = estimation_grid(y, em, f, h, t_grid=t)
        a = estimate_functional(density_estimate(Sample(y), em, kernel, h, g), f, t).theta_hat
        b = estimate_functional_direct(Sample(y), em, kernel, f, h, t).theta_hat
        assert np.max(np.abs(a - b)) < 1e-4

    @given(st.integers(0, 2**31 - 1), st.sampled_from([triangle(0.8), gaussian(0.6), flipped_gamma(2.5)]))
    def test_adjoint_identity_relative(self, seed, f):
        r = np.random.default_rng(seed)
        y = r.normal(size=int(r.integers(1, 60)))
        em = laplace_error(0.4)
        k = _kernel()
        h = float(r.uniform(0.2, 0.8))
        t = [float(r.normal())]
        g = estimation_grid(y, em, f, h, t_grid=t)
        a = estimate_functional(density_estimate(Sample(y), em, k, h, g), f, t).theta_hat[0]
        b = estimate_functional_direct(Sample(y), em, k, f, h, t).theta_hat[0]
        assert abs(a - b) <= 1e-6 * max(1.0, abs(a))


class TestBandwidth:
    def test_rate_example(self):
        assert bandwidth_rate(10_000, 1.0, 0.3, 0.49) == pytest.approx(10 ** (-4 / 2.11))

    def test_warning_free(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            bandwidth_rate(1000, 0.51, 0.0, 0.49)

    def test_inadmissible_warns(self):
        with pytest.warns(AdmissibilityWarning):
            bandwidth_rate(1000, 1.0, 0.5, 0.4)

    def test_rho_side_condition_warns(self):
        # gamma_s in (beta, beta + 1/2] with alpha + 3 gamma_s <= 2 beta + 1
        with pytest.warns(AdmissibilityWarning):
            bandwidth_rate(1000, 0.1, 0.3, 0.4)

    def test_invalid_exponent(self):
        with pytest.raises(InvalidExponent):
            bandwidth_rate(100, 0.0, 0.0, 2.0)
        with pytest.raises(InvalidExponent):
            bandwidth_classical(100, 0.0, 0.0)

    def test_classical_examples(self):
        assert bandwidth_classical(10_000, 1.0, 1.0) == pytest.approx(0.1)
        assert bandwidth_classical(777, 0.49, 0.3) == pytest.approx(777 ** (-1 / 1.58))

    @given(st.integers(2, 10**6), st.floats(0.1, 3), st.floats(0.0, 3))
    def test_classical_scaling(self, n, a, b):
        ratio = bandwidth_classical(4 * n, a, b) / bandwidth_classical(n, a, b)
        assert ratio == pytest.approx(4 ** (-1 / (2 * a + 2 * b)))

    def test_rho_condition(self):
        ok, rho = rho_condition(10_000, 0.05, 0.3, 0.49)
        assert rho == pytest.approx(4 * 0.3 - 4 * 0.49 + 2 + 0.01)
        assert ok == (0.05**rho * 10_000 >= 1)


class TestCurve:
    def test_band_must_contain(self):
        with pytest.raises(InvalidParam):
            EstimateCurve([0, 1], [0.5, 0.5], 10, 0.1, lo=[0.6, 0.4], hi=[0.7, 0.6])

    def test_lengths(self):
        with pytest.raises(InvalidParam):
            EstimateCurve([0, 1], [0.5], 10, 0.1)

    def test_csv_round_trip(self, tmp_path):
        c = EstimateCurve([0.0, 1.5], [0.25, 1 / 3], 7, 0.2, se=[0.1, 0.2], lo=[0.0, 0.1], hi=[0.5, 0.6])
        c.to_csv(tmp_path / "c.csv")
        header = (tmp_path / "c.csv").read_text().splitlines()[0]
        assert header == "t,theta_hat,se,lo,hi"
        back = EstimateCurve.from_csv(tmp_path / "c.csv", 7, 0.2)
        for name in ("t", "theta_hat", "se", "lo", "hi"):
            assert np.array_equal(getattr(back, name), getattr(c, name))

    def test_csv_without_band(self, tmp_path):
        c = EstimateCurve([0.0], [0.25], 7, 0.2)
        c.to_csv(tmp_path / "c.csv")
        back = EstimateCurve.from_csv(tmp_path / "c.csv", 7, 0.2)
        assert back.se is None and back.lo is None


def test_grid_contains_tails():
    y = np.array([-1.0, 4.0])
    g = estimation_grid(y, gamma_error(0.3), triangle(2.0), 0.1, t_grid=[10.0])
    assert g.lo < -1 - 10 and g.hi > 10 + 10
    assert g.step <= 0.1 / 4
    assert estimation_grid(y, no_noise(), indicator(), 0.1).step <= 0.1 / 8
