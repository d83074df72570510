"""Fast internal consistency checks run by ``kdeconv selftest``."""

from __future__ import annotations

import warnings

import numpy as np

from ..error_models import gamma_error, laplace_error, no_noise
from ..estimator import (
    Sample,
    density_estimate,
    estimate_functional,
    estimate_functional_direct,
    estimation_grid,
)
from ..exceptions import AdmissibilityWarning
from ..functionals import flipped_gamma, gaussian, triangle
from ..grid import Grid
from ..kernels import build_flat_top
from ..limit_process import CovarianceEstimate, influence_function, simulate_sup_quantile
from ..oracles import brute_estimate, closed_form_influence

__all__ = ["run_selftest", "random_smooth_config"]


def random_smooth_config(rng: np.random.Generator, n_max: int = 1000):
    """A random (sample, error, functional, h, t-grid) with a smooth or piecewise-smooth ``zeta``."""
    n = int(rng.integers(2, n_max + 1))
    em = [gamma_error(rng.uniform(0.1, 0.9), rng.uniform(0.5, 1.5)),
          laplace_error(rng.uniform(0.2, 0.8)),
          no_noise()][int(rng.integers(3))]
    f = [triangle(rng.uniform(0.5, 2.0)), gaussian(rng.uniform(0.3, 1.5)),
         flipped_gamma(rng.uniform(2.0, 4.0), rng.uniform(0.5, 1.5))][int(rng.integers(3))]
    x = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2.0), n)
    y = x + em.sample(rng, n)
    h = float(rng.uniform(0.15, 0.6))
    t = np.quantile(y, np.linspace(0.1, 0.9, 9)) if n > 1 else y.copy()
    return Sample(y), em, f, h, t


def route_gap(s, em, k, f, h, t) -> float:
    grid = estimation_grid(s.y, em, f, h, t_grid=t)
    a = estimate_functional(density_estimate(s, em, k, h, grid), f, t).theta_hat
    b = estimate_functional_direct(s, em, k, f, h, t).theta_hat
    return float(np.max(np.abs(a - b)))


def run_selftest(seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    k = build_flat_top(0.5)
    out.append({"name": "kernel certification", "passed": bool(k.certified),
                "detail": f"max |moment l>=1| = {max(abs(m) for m in k.moments[1:]):.2e}"})

    em = gamma_error(0.3, 1.0)
    g = Grid(-40.0, 40.0, 2**13)
    inf = influence_function(flipped_gamma(0.8, 1.0), em, g, method="spectral")
    x = g.nodes()
    exact = closed_form_influence(flipped_gamma(0.8, 1.0), em)(x)
    m = (np.abs(x) <= 10) & (np.abs(x) > 2 * g.step)
    rel = float(np.sqrt(np.sum((inf.g.values - exact)[m] ** 2) / np.sum(exact[m] ** 2)))
    out.append({"name": "influence function oracle", "passed": rel < 1e-3, "detail": f"relative L2 {rel:.2e}"})

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdmissibilityWarning)
        gaps = [route_gap(*_unpack(random_smooth_config(rng, 300), k)) for _ in range(5)]
    out.append({"name": "adjoint identity (route A vs B)", "passed": max(gaps) < 1e-4,
                "detail": f"max gap {max(gaps):.2e} over 5 configs"})

    y = np.array([-0.5, 0.2, 1.1])
    s = Sample(y)
    f = triangle(1.0)
    grid = estimation_grid(y, em, f, 0.5, t_grid=[0.0])
    fast = estimate_functional(density_estimate(s, em, k, 0.5, grid), f, [0.0]).theta_hat[0]
    brute = brute_estimate(y, em, k, f, 0.5, 0.0)
    out.append({"name": "FFT vs brute-force quadrature", "passed": abs(fast - brute) < 1e-4,
                "detail": f"|diff| {abs(fast - brute):.2e}"})

    cov = CovarianceEstimate(np.zeros(1), np.eye(1), np.zeros(1), 1)
    q = simulate_sup_quantile(cov, 0.05, 100_000, seed).q
    out.append({"name": "sup-quantile of |N(0,1)|", "passed": abs(q - 1.96) < 0.03, "detail": f"q = {q:.4f}"})
    return out


def _unpack(cfg, k):
    s, em, f, h, t = cfg
    return s, em, k, f, h, t
