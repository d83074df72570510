"""Independent references for the fast paths.

Nothing here uses an FFT: the brute-force estimator integrates the
defining double integral directly, the influence functions are closed forms,
and truths come from the signal law or adaptive quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from .error_models import ErrorModel
from .exceptions import TooLarge, UnsupportedScenario
from .functionals import Functional
from .grid import Grid, GridFunction, inverse_transform
from .kernels import Kernel
from .signals import SignalLaw

__all__ = [
    "Scenario",
    "closed_form_influence",
    "brute_estimate",
    "analytic_truth",
    "observation_density",
    "expected_estimate",
    "smoothed_ecdf",
    "BRUTE_MAX_N",
]

BRUTE_MAX_N = 50


@dataclass(frozen=True)
class Scenario:
    signal: SignalLaw
    em: ErrorModel
    functional: Functional

    def truth(self, t):
        return analytic_truth(self, t)


def _gamma_pdf_neg(shape: float, scale: float):
    def pdf(x):
        y = -np.asarray(x, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        yp = y[pos]
        out[pos] = np.exp(
            (shape - 1.0) * np.log(yp) - yp / scale - special.gammaln(shape) - shape * np.log(scale)
        )
        return out

    return pdf


def closed_form_influence(f: Functional, em: ErrorModel) -> Callable | None:
    """Closed-form ``g_0`` when one is known, else ``None``.

    Known cases:

    * no error: ``g_0 = zeta``.
    * flipped gamma ``zeta = gamma_{s,eta}(-.)`` under gamma errors with the
      same scale and ``s > beta``: ``g_0 = gamma_{s-beta,eta}(-.)``.
    * indicator under gamma errors with ``beta < 1``:
      ``g_0(x) = [G(-x) + eta gamma_{1-beta,eta}(-x)] 1{x < 0}`` where ``G``
      is the ``gamma_{1-beta,eta}`` distribution function.
    * Gaussian ``zeta`` under Laplace errors: ``g_0 = zeta - eta**2 zeta''``.
    """
    spec = em.spec
    if spec.get("kind") == "none":
        return f.evaluate
    gamma_err = spec.get("kind") == "gamma" and not spec.get("flip", False)
    if gamma_err and f.kind == "flipped_gamma" and np.isclose(f.params["eta"], spec["eta"]):
        d = f.params["sigma"] - spec["beta"]
        if d > 0 and "scale" not in f.params:
            return _gamma_pdf_neg(d, spec["eta"])
    if gamma_err and f.kind == "indicator" and spec["beta"] < 1.0:
        a, eta = 1.0 - spec["beta"], spec["eta"]
        dens = _gamma_pdf_neg(a, eta)

        def g_ind(x):
            x = np.asarray(x, dtype=float)
            neg = x < 0
            return np.where(neg, stats.gamma.cdf(np.where(neg, -x, 0.0), a, scale=eta) + eta * dens(x), 0.0)

        return g_ind
    if spec.get("kind") == "laplace" and f.kind == "gaussian" and "scale" not in f.params:
        eta, sd = spec["eta"], f.params["sd"]

        def g_gauss(x):
            x = np.asarray(x, dtype=float)
            z = stats.norm.pdf(x, scale=sd)
            return z - eta**2 * z * (x**2 / sd**4 - 1.0 / sd**2)

        return g_gauss
    return None


def _outer_rule(f: Functional, t: float, h: float):
    """Nodes and weights for ``int zeta(x - t) phi(x) dx`` with smooth ``phi``."""
    panel = min(h, 0.25) / 2.0
    gl_x, gl_w = np.polynomial.legendre.leggauss(16)

    def composite(a, b):
        k = max(1, int(np.ceil((b - a) / panel)))
        e = np.linspace(a, b, k + 1)
        half, mid = 0.5 * np.diff(e), 0.5 * (e[1:] + e[:-1])
        xs = (mid[:, None] + half[:, None] * gl_x).ravel()
        ws = (half[:, None] * gl_w).ravel()
        return xs, ws * f.evaluate(xs - t)

    if f.kind == "flipped_gamma" and "scale" not in f.params:
        s, eta = f.params["sigma"], f.params["eta"]
        # first panel [t - a, t] with Gauss-Jacobi weight (t - x)**(s - 1)
        a = panel
        jx, jw = special.roots_jacobi(40, 0.0, s - 1.0)
        y = 0.5 * a * (jx + 1.0)
        smooth = np.exp(-y / eta - special.gammaln(s) - s * np.log(eta))
        x1 = t - y
        w1 = jw * (0.5 * a) ** s * smooth
        x2, w2 = composite(t + f.support[0], t - a)
        return np.concatenate([x1, x2]), np.concatenate([w1, w2])
    lo, hi = f.support
    cuts = sorted({t + lo, t + hi, *(t + p for p in f.singular_points)})
    parts = [composite(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def brute_estimate(
    y, em: ErrorModel, k: Kernel, f: Functional, h: float, t: float, tol: float = 1e-10
) -> float:
    """Direct evaluation of ``int zeta(x - t) F^{-1}[FK(h u) phi_n(u) / phi_eps(u)](x) dx``.

    The inner inverse transform is ``(1/pi) int_0^{1/h} Re[...] du`` by
    adaptive vector quadrature; the outer integral uses composite
    Gauss-Legendre panels over the support of ``zeta_t`` (Gauss-Jacobi at a
    singular endpoint).

    Raises
    ------
    TooLarge
        If the sample has more than 50 points.
    UnsupportedScenario
        For the indicator, whose support is unbounded.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.size > BRUTE_MAX_N:
        raise TooLarge(f"brute-force oracle is limited to n <= {BRUTE_MAX_N}, got {y.size}")
    if f.kind == "indicator":
        raise UnsupportedScenario("the brute-force oracle needs a functional with bounded support")
    xs, ws = _outer_rule(f, t, h)

    def inner(u):
        phin = np.mean(np.exp(1j * u * y))
        amp = k.ft(h * u) * phin * em.cf_recip(np.array([u]))[0]
        return (np.exp(-1j * u * xs) * amp).real / np.pi

    fhat, _ = integrate.quad_vec(inner, 0.0, 1.0 / h, epsabs=tol, epsrel=tol, limit=2000)
    return float(np.dot(ws, fhat))


def analytic_truth(sc: Scenario, t):
    """``theta_t = int zeta(x - t) f_X(x) dx`` in closed form where possible.

    Closed forms cover the indicator (distribution function), a Gaussian
    ``zeta`` with a normal signal, and a flipped gamma ``zeta`` against a
    gamma signal of the same scale.  Everything else falls back to adaptive
    quadrature with absolute tolerance 1e-10.
    """
    f, sig = sc.functional, sc.signal
    ta = np.asarray(t, dtype=float)
    scale = f.params.get("scale", 1.0)
    if f.kind == "indicator":
        out = sig.cdf(ta)
    elif f.kind == "gaussian" and sig.kind == "normal":
        sd = np.hypot(f.params["sd"], sig.params["sd"])
        out = stats.norm.pdf(ta, loc=sig.params["mean"], scale=sd)
    elif f.kind == "flipped_gamma" and sig.kind == "gamma" and np.isclose(f.params["eta"], sig.params["scale"]):
        # int gamma_s(x - t) f_X(x) dx is the density of X + Z at t, Z ~ gamma_s
        out = stats.gamma.pdf(ta, sig.params["shape"] + f.params["sigma"], scale=sig.params["scale"])
    else:
        out = np.vectorize(lambda tt: _quad_truth(sc, tt))(ta)
    out = scale * np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def _quad_truth(sc: Scenario, t: float) -> float:
    f, sig = sc.functional, sc.signal
    slo, shi = sig.support(1e-14)
    lo = max(slo, t + f.support[0]) if np.isfinite(f.support[0]) else slo
    hi = min(shi, t + f.support[1]) if np.isfinite(f.support[1]) else shi
    if hi <= lo:
        return 0.0
    pts = [t + p for p in f.singular_points if lo < t + p < hi]
    base = f.params.get("scale", 1.0)

    def integrand(x):
        return float(f.evaluate(x - t)) / base * float(sig.pdf(x))

    cuts = sorted({lo, hi, *pts})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += integrate.quad(integrand, a, b, limit=400, epsabs=1e-10, epsrel=1e-10)[0]
    return total


def observation_density(signal: SignalLaw, em: ErrorModel, m: int = 2**15) -> GridFunction:
    """Density of ``Y = X + eps`` as ``F^{-1}[phi_X phi_eps]`` on an ``m``-point grid."""
    slo, shi = signal.support(1e-13)
    reach = 30.0 * em.sd
    lo = slo + min(0.0, em.mean - reach) - 1.0
    hi = shi + max(0.0, em.mean + reach) + 1.0
    grid = Grid(lo, hi, m)
    spec = GridFunction.spectrum(grid, lambda u: signal.cf(u) * em.cf(u))
    return inverse_transform(spec, real=True)


def expected_estimate(signal: SignalLaw, k: Kernel, f: Functional, h: float, t: float) -> float:
    """``E theta_hat_t = (1/2pi) int exp(-iut) F zeta(-u) phi_X(u) FK(hu) du``.

    The error law cancels in expectation, so ``expected_estimate - theta_t``
    is the deterministic smoothing bias at bandwidth ``h``.
    """
    if f.ft is None:
        raise UnsupportedScenario("the expected estimate needs a closed-form Fourier transform")

    def integrand(u):
        return (np.exp(-1j * u * t) * f.ft(-u) * signal.cf(u) * k.ft(h * u)).real / np.pi

    edges = np.linspace(0.0, 1.0 / h, 65)
    return float(sum(integrate.quad(integrand, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
                     for a, b in zip(edges[:-1], edges[1:])))


def smoothed_ecdf(y, k: Kernel, h: float, t, chunk: int = 2**16) -> np.ndarray:
    """``mean_j Kbar((t - Y_j)/h)`` with the kernel distribution function
    ``Kbar(z) = 1/2 + (1/pi) int_0^1 FK(u) sin(u z)/u du``.

    The flat part gives ``Si(c z)/pi``; the ramp uses Gauss-Legendre panels
    fine enough for the largest ``|z|``.
    """
    y = np.asarray(y, dtype=float).ravel()
    ta = np.atleast_1d(np.asarray(t, dtype=float))
    c = k.flat_radius
    z = (ta[:, None] - y[None, :]).ravel() / h
    zmax = float(np.max(np.abs(z), initial=0.0))
    panels = int(max(64, np.ceil(zmax * (1.0 - c) / np.pi) * 2))
    gx, gw = np.polynomial.legendre.leggauss(12)
    e = np.linspace(c, 1.0, panels + 1)
    half, mid = 0.5 * np.diff(e), 0.5 * (e[1:] + e[:-1])
    u = (mid[:, None] + half[:, None] * gx).ravel()
    w = (half[:, None] * gw).ravel() * k.ft(u) / u
    out = np.empty(z.size)
    step = max(1, chunk // 16)
    for a in range(0, z.size, step):
        zz = z[a : a + step]
        out[a : a + step] = 0.5 + (special.sici(c * zz)[0] + np.sin(np.outer(zz, u)) @ w) / np.pi
    return out.reshape(ta.size, y.size).mean(axis=1)
