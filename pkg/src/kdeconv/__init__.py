"""Deconvolution estimation of linear functionals with uniform confidence bands.

Observations ``Y = X + eps`` with a known ordinary smooth error law are used
to estimate ``theta_t = int zeta(x - t) f_X(x) dx`` for a family of test
functions ``zeta``.  The package provides the estimator, its Gaussian limit
(influence functions, plug-in covariance, sup-quantiles, bands), independent
oracles and a replication harness.
"""

from .error_models import ErrorModel, convolve_errors, gamma_error, laplace_error, no_noise
from .estimator import (
    EstimateCurve,
    Sample,
    bandwidth_classical,
    bandwidth_rate,
    density_estimate,
    empirical_cf,
    estimate_functional,
    estimate_functional_direct,
)
from .functionals import Functional, flipped_gamma, gaussian, indicator, translate_ft, triangle
from .grid import Grid, GridFunction
from .kernels import Kernel, build_flat_top, scale
from .limit_process import (
    BandResult,
    CovarianceEstimate,
    confidence_band,
    covariance_plugin,
    efficiency_bound,
    influence_function,
    simulate_sup_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "ErrorModel", "convolve_errors", "gamma_error", "laplace_error", "no_noise",
    "EstimateCurve", "Sample", "bandwidth_classical", "bandwidth_rate", "density_estimate",
    "empirical_cf", "estimate_functional", "estimate_functional_direct",
    "Functional", "flipped_gamma", "gaussian", "indicator", "translate_ft", "triangle",
    "Grid", "GridFunction", "Kernel", "build_flat_top", "scale",
    "BandResult", "CovarianceEstimate", "confidence_band", "covariance_plugin",
    "efficiency_bound", "influence_function", "simulate_sup_quantile",
]
