import warnings

import numpy as np
import pytest
from scipy import stats

from kdeconv.error_models import gamma_error, laplace_error, no_noise
from kdeconv.estimator import Sample, density_estimate, estimate_functional, estimation_grid
from kdeconv.exceptions import AdmissibilityWarning, TooLarge, UnsupportedScenario
from kdeconv.functionals import flipped_gamma, gaussian, indicator, triangle
from kdeconv.oracles import (
    BRUTE_MAX_N,
    Scenario,
    analytic_truth,
    brute_estimate,
    expected_estimate,
    observation_density,
    smoothed_ecdf,
)
from kdeconv.grid import integrate as grid_integrate
from kdeconv.signals import gamma_signal, mixture_signal, normal_signal


def fft_estimate(y, em, k, f, h, t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdmissibilityWarning)
        grid = estimation_grid(y, em, f, h, t_grid=[t])
        return estimate_functional(density_estimate(Sample(y), em, k, h, grid), f, [t]).theta_hat[0]


class TestBrute:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_fft(self, seed, kernel):
        r = np.random.default_rng(1000 + seed)
        n = int(r.integers(1, 21))
        em = [gamma_error(r.uniform(0.1, 0.9)), laplace_error(r.uniform(0.2, 0.8)), no_noise()][seed % 3]
        f = [triangle(r.uniform(0.5, 2.0)), gaussian(r.uniform(0.4, 1.5)), flipped_gamma(r.uniform(2.0, 4.0))][
            (seed // 3) % 3
        ]
        y = r.normal(0.0, 1.0, n)
        h = float(r.uniform(0.2, 0.6))
        t = float(r.uniform(-1.0, 1.0))
        assert abs(brute_estimate(y, em, kernel, f, h, t) - fft_estimate(y, em, kernel, f, h, t)) < 1e-4

    def test_too_large(self, kernel):
        with pytest.raises(TooLarge):
            brute_estimate(np.zeros(BRUTE_MAX_N + 1), no_noise(), kernel, triangle(), 0.5, 0.0)

    def test_indicator_unsupported(self, kernel):
        with pytest.raises(UnsupportedScenario):
            brute_estimate(np.zeros(3), no_noise(), kernel, indicator(), 0.5, 0.0)

    def test_linear_in_sample(self, kernel):
        em, f = laplace_error(0.5), triangle(1.0)
        a, b = np.array([-0.3, 0.4]), np.array([1.2])
        both = brute_estimate(np.concatenate([a, b]), em, kernel, f, 0.4, 0.1)
        parts = (2 * brute_estimate(a, em, kernel, f, 0.4, 0.1) + brute_estimate(b, em, kernel, f, 0.4, 0.1)) / 3
        assert both == pytest.approx(parts, abs=1e-9)

    def test_no_noise_single_point(self, kernel):
        # a point mass smoothed by K_h then integrated against zeta_t
        f = gaussian(1.0)
        h = 0.3
        val = brute_estimate(np.array([0.0]), no_noise(), kernel, f, h, 0.5)
        x = np.linspace(-60, 60, 2**16 + 1)
        ref = np.trapezoid(f.evaluate(x - 0.5) * kernel.values(x / h) / h, x)
        assert val == pytest.approx(ref, abs=1e-8)


class TestTruth:
    def test_indicator_is_cdf(self):
        sc = Scenario(gamma_signal(2.0), gamma_error(0.3), indicator())
        np.testing.assert_allclose(analytic_truth(sc, [1.0, 2.0]), stats.gamma.cdf([1.0, 2.0], 2.0))

    def test_gaussian_normal(self):
        sc = Scenario(normal_signal(0.5, 1.0), laplace_error(), gaussian(1.0))
        assert analytic_truth(sc, 0.0) == pytest.approx(stats.norm.pdf(0.0, 0.5, np.sqrt(2.0)))

    def test_flipped_gamma_closed_form_vs_quadrature(self):
        sig, f = gamma_signal(2.0), flipped_gamma(1.5)
        sc = Scenario(sig, gamma_error(0.3), f)
        from kdeconv.oracles import _quad_truth

        for t in (0.5, 1.7, 3.0):
            assert analytic_truth(sc, t) == pytest.approx(_quad_truth(sc, t), abs=1e-8)

    def test_quadrature_fallback(self):
        sig = mixture_signal([0.5, 0.5], [-1.0, 1.0], [0.5, 0.5])
        sc = Scenario(sig, laplace_error(), triangle(1.0))
        x = np.linspace(-10, 10, 200001)
        ref = np.trapezoid(triangle(1.0).evaluate(x - 0.2) * sig.pdf(x), x)
        assert analytic_truth(sc, 0.2) == pytest.approx(ref, abs=1e-8)

    def test_cdf_monotone(self):
        sc = Scenario(mixture_signal([0.3, 0.7], [-1.0, 2.0], [1.0, 0.5]), no_noise(), indicator())
        v = analytic_truth(sc, np.linspace(-4, 5, 50))
        assert np.all(np.diff(v) >= 0)


class TestObservationDensity:
    def test_mass_and_mean(self):
        fy = observation_density(gamma_signal(2.0), gamma_error(0.3), m=2**14)
        x = fy.grid.nodes()
        assert grid_integrate(fy) == pytest.approx(1.0, abs=1e-6)
        assert grid_integrate(fy.with_values(fy.values.real * x, real=True)) == pytest.approx(2.3, abs=1e-4)

    def test_normal_laplace_variance(self):
        fy = observation_density(normal_signal(0.0, 1.0), laplace_error(0.5), m=2**14)
        x = fy.grid.nodes()
        assert grid_integrate(fy.with_values(fy.values.real * x**2, real=True)) == pytest.approx(1.5, abs=1e-6)


class TestExpectedEstimate:
    def test_bias_shrinks(self, kernel):
        sig, f = normal_signal(), gaussian(1.0)
        truth = stats.norm.pdf(0.0, scale=np.sqrt(2.0))
        b = [abs(expected_estimate(sig, kernel, f, h, 0.0) - truth) for h in (0.8, 0.4, 0.2, 0.1)]
        assert b[0] > b[1] > b[2] > b[3]
        assert b[3] < 1e-8

    def test_matches_no_noise_mean(self, kernel):
        sig, f = gamma_signal(3.0), flipped_gamma(2.0)
        h = 0.2
        val = expected_estimate(sig, kernel, f, h, 1.0)
        truth = analytic_truth(Scenario(sig, no_noise(), f), 1.0)
        assert abs(val - truth) < 1e-3

    def test_indicator_unsupported(self, kernel):
        with pytest.raises(UnsupportedScenario):
            expected_estimate(normal_signal(), kernel, indicator(), 0.3, 0.0)


class TestSmoothedEcdf:
    def test_limits(self, kernel):
        y = np.array([0.0])
        v = smoothed_ecdf(y, kernel, 0.1, [-1e3, 0.0, 1e3])
        assert v[1] == pytest.approx(0.5, abs=1e-14)
        assert abs(v[0]) < 1e-6 and abs(v[2] - 1.0) < 1e-6

    def test_derivative_is_kernel(self, kernel):
        y = np.array([0.0])
        h, z, d = 1.0, np.linspace(-5, 5, 21), 1e-4
        num = (smoothed_ecdf(y, kernel, h, z + d) - smoothed_ecdf(y, kernel, h, z - d)) / (2 * d)
        np.testing.assert_allclose(num, kernel.values(z), atol=1e-7)

    def test_close_to_ecdf_for_small_h(self, kernel, rng):
        y = rng.normal(size=200)
        t = np.linspace(-2, 2, 9)
        t = t[np.min(np.abs(t[:, None] - y[None, :]), axis=1) > 0.05]
        v = smoothed_ecdf(y, kernel, 0.001, t)
        ecdf = (y[None, :] <= t[:, None]).mean(axis=1)
        assert np.max(np.abs(v - ecdf)) < 0.01
