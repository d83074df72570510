"""Influence functions, plug-in covariance, sup-quantiles and confidence bands.

The estimator process ``sqrt(n) (theta_hat_t - theta_t)`` has a Gaussian limit
with covariance ``Sigma_{s,t} = int g_s g_t dP - theta_s theta_t`` where
``g_t(x) = g_0(x - t)`` and ``g_0 = F^{-1}[1 / phi_eps(-u)] * zeta``.
"""

from __future__ import annotations

import csv
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as sp_integrate
from scipy import linalg

from .error_models import ErrorModel
from .estimator import EstimateCurve, Sample
from .exceptions import CholeskyFailure, InvalidCutoff, InvalidParam, OutOfDomain
from .functionals import Functional
from .grid import Grid, GridFunction, interpolate, inverse_transform

__all__ = [
    "InfluenceFunction",
    "CovarianceEstimate",
    "BandResult",
    "influence_function",
    "stability_certificate",
    "covariance_plugin",
    "covariance_population",
    "repair_psd",
    "simulate_sup_quantile",
    "confidence_band",
    "efficiency_bound",
]

log = logging.getLogger(__name__)

PSD_FLOOR = 1e-10
DEFAULT_OVERSAMPLE = 8


@dataclass(frozen=True)
class InfluenceFunction:
    """``g_0`` sampled on ``g.grid``.

    Evaluation off the grid nodes uses the closed form when ``exact`` is set,
    otherwise cubic interpolation on the oversampled grid ``fine`` (plus the
    exact indicator part for the indicator functional).
    """

    g: GridFunction
    cutoff: float
    functional: Functional
    em: ErrorModel
    method: str
    fine: GridFunction | None = field(default=None, repr=False)
    exact: Callable | None = field(default=None, repr=False)
    step_part: bool = False

    @property
    def grid(self) -> Grid:
        return self.g.grid

    @property
    def singular_points(self) -> tuple:
        pts = set(self.functional.singular_points)
        pts.update(self.em.singular_points)
        return tuple(sorted(pts))

    def evaluate(self, x):
        """``g_0(x)``; raises :class:`OutOfDomain` outside the grid."""
        xa = np.asarray(x, dtype=float)
        if not np.all(self.grid.contains(xa)):
            raise OutOfDomain(
                f"influence function evaluated outside [{self.grid.lo:.4g}, {self.grid.hi:.4g}]"
            )
        if self.exact is not None:
            return np.asarray(self.exact(xa), dtype=float)
        out = interpolate(self.fine, xa)
        if self.step_part:
            out = out + (xa <= 0.0)
        return out

    def __call__(self, x):
        return self.evaluate(x)

    def translate(self, t: float) -> Callable:
        """``g_t = g_0(. - t)``."""
        return lambda x: self.evaluate(np.asarray(x, dtype=float) - t)


def _taper(a: np.ndarray, cutoff: float) -> np.ndarray:
    # C2 smootherstep from 1 at cutoff/2 to 0 at cutoff
    s = np.clip((a - 0.5 * cutoff) / (0.5 * cutoff), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def _spectral(f: Functional, em: ErrorModel, fine: Grid, cutoff: float):
    u = fine.dual().nodes()
    w = _taper(np.abs(u), cutoff)
    if f.ft is not None:
        spec = f.ft(u) * em.cf_recip(-u) * w
        step_part = False
    else:
        # 1/phi(-u) F1_{(-inf,0]} = F1_{(-inf,0]} + r(u); the first term is added back in x-space
        zero = u == 0.0
        uz = np.where(zero, 1.0, u)
        r = -1j * (em.cf_recip(-uz) - 1.0) / uz
        r = np.where(zero, 1j * em.cf_recip_deriv(np.zeros(1))[0], r)
        spec = r * w
        step_part = True
    gf = inverse_transform(GridFunction(fine.dual(), spec, spatial=fine), real=True)
    return gf, step_part


def influence_function(
    f: Functional,
    em: ErrorModel,
    grid: Grid,
    cutoff: float | None = None,
    method: str = "auto",
    oversample: int = DEFAULT_OVERSAMPLE,
) -> InfluenceFunction:
    """Compute ``g_0 = F^{-1}[F zeta(u) / phi_eps(-u)]`` on ``grid``.

    Parameters
    ----------
    cutoff : float, optional
        Spectral cutoff ``U``; the spectrum is tapered to zero on
        ``[U/2, U]``.  Defaults to ``0.9 * pi / fine_step`` where the fine
        grid has ``oversample`` times the nodes of ``grid``.
    method : {"auto", "spectral", "analytic"}
        ``"auto"`` uses a closed form when one is known.
    oversample : int
        Refinement of the internal grid.  The coarse values are a subsample,
        so they do not depend on interpolation.

    Raises
    ------
    InvalidCutoff
        If ``cutoff`` is not positive or exceeds the fine grid's Nyquist
        frequency.
    """
    from .oracles import closed_form_influence

    if method not in ("auto", "spectral", "analytic"):
        raise InvalidParam(f"unknown method {method!r}")
    oversample = int(oversample)
    if oversample < 1 or oversample & (oversample - 1):
        raise InvalidParam("oversample must be a power of two")
    fine = grid.refine(oversample)
    if cutoff is None:
        cutoff = 0.9 * fine.nyquist
    if not (np.isfinite(cutoff) and 0 < cutoff <= fine.nyquist):
        raise InvalidCutoff(f"cutoff must lie in (0, {fine.nyquist:.4g}], got {cutoff}")

    exact = closed_form_influence(f, em) if method != "spectral" else None
    if method == "analytic" and exact is None:
        raise InvalidParam(f"no closed form for {f.kind} under {em.name}")
    if exact is not None:
        g = GridFunction(grid, exact(grid.nodes()), real=True)
        return InfluenceFunction(g, float(cutoff), f, em, "analytic", exact=exact)

    gf, step_part = _spectral(f, em, fine, cutoff)
    coarse = gf.values[::oversample]
    if step_part:
        coarse = coarse + (grid.nodes() <= 0.0)
    g = GridFunction(grid, coarse, real=True)
    return InfluenceFunction(g, float(cutoff), f, em, "spectral", fine=gf, step_part=step_part)


def stability_certificate(inf: InfluenceFunction, probes: int = 100, seed: int = 0) -> float:
    """Relative change of ``g_0`` when the cutoff is doubled.

    Returns ``max |g_2U - g_U| / max |g_2U|`` over random probe points that
    stay ``2 * grid.step`` away from singular points.
    """
    if inf.method != "spectral":
        return 0.0
    grid = inf.grid
    ov = inf.fine.grid.m // grid.m
    finer = influence_function(inf.functional, inf.em, grid, 2.0 * inf.cutoff, "spectral", 2 * ov)
    rng = np.random.default_rng(seed)
    span = grid.hi - grid.lo
    x = grid.lo + span * (0.05 + 0.9 * rng.random(4 * probes))
    for p in inf.singular_points:
        x = x[np.abs(x - p) > 2.0 * grid.step]
    x = x[:probes]
    a, b = inf.evaluate(x), finer.evaluate(x)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), np.finfo(float).tiny))


@dataclass(frozen=True)
class CovarianceEstimate:
    t: np.ndarray
    sigma: np.ndarray
    theta: np.ndarray
    n: int
    repair_shift: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": self.t.tolist(),
                "sigma": self.sigma.tolist(),
                "theta": self.theta.tolist(),
                "n": self.n,
                "repair_shift": self.repair_shift,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CovarianceEstimate":
        d = json.loads(text)
        return cls(np.array(d["t"]), np.array(d["sigma"]), np.array(d["theta"]), d["n"], d["repair_shift"])

    def sigma_to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *[repr(float(v)) for v in self.t]])
            for ti, row in zip(self.t, self.sigma):
                w.writerow([repr(float(ti)), *[repr(float(v)) for v in row]])


@dataclass(frozen=True)
class BandResult:
    q: float
    alpha: float
    reps: int
    n: int

    @property
    def band_halfwidth(self) -> float:
        return self.q / np.sqrt(self.n)

    def to_json(self) -> str:
        return json.dumps({**asdict(self), "band_halfwidth": self.band_halfwidth})

    @classmethod
    def from_json(cls, text: str) -> "BandResult":
        d = json.loads(text)
        d.pop("band_halfwidth", None)
        return cls(**d)


def repair_psd(sigma: np.ndarray, floor: float = PSD_FLOOR) -> tuple[np.ndarray, float]:
    """Symmetrise and floor the eigenvalues at ``floor * trace``.

    Returns the repaired matrix and the largest eigenvalue change (zero when
    no eigenvalue was below the floor, in which case the symmetrised input is
    returned unchanged).
    """
    s = 0.5 * (sigma + sigma.T)
    tr = float(np.trace(s))
    if tr <= 0.0:
        return np.zeros_like(s), float(np.max(np.abs(s), initial=0.0))
    vals, vecs = linalg.eigh(s)
    lim = floor * tr
    if vals.min() >= lim:
        return s, 0.0
    new = np.maximum(vals, lim)
    out = (vecs * new) @ vecs.T
    return 0.5 * (out + out.T), float(np.max(new - vals))


def covariance_plugin(inf: InfluenceFunction, s: Sample, curve: EstimateCurve) -> CovarianceEstimate:
    """``Sigma_hat_{ij} = mean_k g_0(Y_k - t_i) g_0(Y_k - t_j) - theta_i theta_j``, then PSD repair."""
    if curve.n != s.n:
        raise InvalidParam("curve and sample sizes differ")
    G = inf.evaluate(s.y[:, None] - curve.t[None, :])
    th = curve.theta_hat
    sigma = G.T @ G / s.n - np.outer(th, th)
    sigma, shift = repair_psd(sigma)
    return CovarianceEstimate(curve.t.copy(), sigma, th.copy(), s.n, shift)


def covariance_population(inf: InfluenceFunction, fy: GridFunction, t, theta) -> np.ndarray:
    """``int g_s g_t f_Y - theta_s theta_t`` by the trapezoid rule on ``fy.grid``.

    Accurate for bounded ``g_0``; for singular ``g_0`` use :func:`efficiency_bound`.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = fy.grid.nodes()
    G = inf.evaluate(x[:, None] - t[None, :])
    w = fy.values * fy.grid.step
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    return (G * w[:, None]).T @ G - np.outer(th, th)


def simulate_sup_quantile(
    cov: CovarianceEstimate, alpha: float = 0.05, reps: int = 2000, seed=0, chunk: int = 4096
) -> BandResult:
    """Monte Carlo ``(1 - alpha)``-quantile of ``max_t |G(t)|`` with ``G ~ N(0, sigma)``.

    Raises
    ------
    CholeskyFailure
        If the (repaired) covariance has no Cholesky factor.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParam(f"alpha must lie in (0, 1), got {alpha}")
    if reps < 1:
        raise InvalidParam("reps must be positive")
    sigma = np.asarray(cov.sigma, dtype=float)
    if not np.any(sigma):
        return BandResult(0.0, float(alpha), int(reps), int(cov.n))
    try:
        L = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise CholeskyFailure(f"covariance is not positive definite: {exc}") from None
    rng = np.random.default_rng(seed)
    sups = np.empty(reps)
    for a in range(0, reps, chunk):
        b = min(reps, a + chunk)
        z = rng.standard_normal((b - a, sigma.shape[0])) @ L.T
        sups[a:b] = np.max(np.abs(z), axis=1)
    q = float(np.quantile(sups, 1.0 - alpha))
    return BandResult(q, float(alpha), int(reps), int(cov.n))


def confidence_band(curve: EstimateCurve, band: BandResult) -> EstimateCurve:
    """Attach ``theta_hat -/+ q / sqrt(n)`` to the curve."""
    if curve.n != band.n:
        raise InvalidParam(f"curve has n={curve.n} but band was built for n={band.n}")
    hw = band.band_halfwidth
    return curve.with_band(curve.theta_hat - hw, curve.theta_hat + hw)


def efficiency_bound(
    f: Functional,
    em: ErrorModel,
    fy: GridFunction,
    theta0: float,
    t: float = 0.0,
    inf: InfluenceFunction | None = None,
) -> float:
    """``int g_t**2 f_Y - theta0**2`` by adaptive quadrature.

    The integral is split at the singular points of ``g_t`` so integrable
    endpoint singularities are handled by the quadrature's extrapolation.
    ``inf`` defaults to :func:`influence_function` on a grid centred at zero
    that covers ``fy.grid`` shifted by ``t``.
    """
    if inf is None:
        span = max(abs(fy.grid.lo - t), abs(fy.grid.hi - t))
        gg = Grid(-span - 1.0, span + 1.0, 2**14)
        inf = influence_function(f, em, gg)
    lo, hi = fy.grid.lo, fy.grid.hi
    if not (inf.grid.contains(lo - t) and inf.grid.contains(hi - t)):
        raise OutOfDomain("the influence grid does not cover the observation density")
    cuts = sorted({lo, hi, *(p + t for p in inf.singular_points if lo < p + t < hi)})

    def integrand(x):
        return float(inf.evaluate(x - t)) ** 2 * float(interpolate(fy, x))

    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", sp_integrate.IntegrationWarning)
            val, err = sp_integrate.quad(integrand, a, b, limit=500, epsabs=1e-11, epsrel=1e-10)
        if caught:
            log.info("efficiency bound on [%.4g, %.4g]: quadrature error estimate %.2g", a, b, err)
        total += val
    return float(total - theta0**2)
