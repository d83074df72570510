"""Ordinary smooth measurement-error laws.

Each :class:`ErrorModel` carries the characteristic function ``cf``, its
reciprocal ``cf_recip = 1/cf`` and the derivative of the reciprocal, which is
what the estimator divides by and what the decay index ``beta`` controls:
``|1/cf(u)| <~ <u>**beta`` and ``|(1/cf)'(u)| <~ <u>**(beta-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, stats

from .exceptions import InvalidParam

__all__ = [
    "ErrorModel",
    "gamma_error",
    "laplace_error",
    "flip_error",
    "convolve_errors",
    "no_noise",
    "chi_squared_error",
    "decay_ratios",
    "from_spec",
]


@dataclass(frozen=True)
class ErrorModel:
    """Law of the additive error ``eps`` in ``Y = X + eps``.

    Attributes
    ----------
    beta : float
        Polynomial decay index of ``cf``.
    cf, cf_recip, cf_recip_deriv : callable
        ``u -> phi(u)``, ``u -> 1/phi(u)`` and ``u -> (1/phi)'(u)``.
    density : callable or None
        Density of ``eps``; ``None`` for the point mass at zero.
    sampler : callable
        ``(rng, n) -> ndarray`` drawing ``n`` errors from a numpy Generator.
    mean, var : float
        Analytic moments.
    spec : dict
        Config description that rebuilds the model with :func:`from_spec`.
    singular_points : tuple of float
        Points where the density is unbounded or not smooth.
    """

    name: str
    beta: float
    cf: Callable
    cf_recip: Callable
    cf_recip_deriv: Callable
    density: Callable | None
    sampler: Callable
    mean: float
    var: float
    spec: dict = field(compare=False)
    singular_points: tuple = ()

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.var))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.sampler(rng, int(n)), dtype=float)


def _positive(**kw):
    for k, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise InvalidParam(f"{k} must be positive and finite, got {v}")


def gamma_error(beta: float, eta: float = 1.0) -> ErrorModel:
    """Gamma law with shape ``beta`` and scale ``eta``; ``cf(u) = (1 - i eta u)**(-beta)``."""
    _positive(beta=beta, eta=eta)
    beta, eta = float(beta), float(eta)

    def cf(u):
        return (1.0 - 1j * eta * np.asarray(u, dtype=float)) ** (-beta)

    def cf_recip(u):
        return (1.0 - 1j * eta * np.asarray(u, dtype=float)) ** beta

    def cf_recip_deriv(u):
        return -1j * eta * beta * (1.0 - 1j * eta * np.asarray(u, dtype=float)) ** (beta - 1.0)

    law = stats.gamma(beta, scale=eta)
    return ErrorModel(
        name=f"gamma({beta:g},{eta:g})",
        beta=beta,
        cf=cf,
        cf_recip=cf_recip,
        cf_recip_deriv=cf_recip_deriv,
        density=law.pdf,
        sampler=lambda rng, n: rng.gamma(beta, eta, size=n),
        mean=beta * eta,
        var=beta * eta**2,
        spec={"kind": "gamma", "beta": beta, "eta": eta},
        singular_points=(0.0,),
    )


def chi_squared_error(k: float) -> ErrorModel:
    """Chi-squared with ``k`` degrees of freedom, i.e. ``gamma_error(k/2, 2)``."""
    _positive(k=k)
    return gamma_error(k / 2.0, 2.0)


def laplace_error(eta: float = 1.0) -> ErrorModel:
    """Symmetric Laplace law with scale ``eta``; ``cf(u) = 1/(1 + eta**2 u**2)``."""
    _positive(eta=eta)
    eta = float(eta)

    def cf(u):
        u = np.asarray(u, dtype=float)
        return 1.0 / (1.0 + eta**2 * u**2) + 0j

    def cf_recip(u):
        u = np.asarray(u, dtype=float)
        return 1.0 + eta**2 * u**2 + 0j

    def cf_recip_deriv(u):
        return 2.0 * eta**2 * np.asarray(u, dtype=float) + 0j

    law = stats.laplace(scale=eta)
    return ErrorModel(
        name=f"laplace({eta:g})",
        beta=2.0,
        cf=cf,
        cf_recip=cf_recip,
        cf_recip_deriv=cf_recip_deriv,
        density=law.pdf,
        sampler=lambda rng, n: rng.laplace(0.0, eta, size=n),
        mean=0.0,
        var=2.0 * eta**2,
        spec={"kind": "laplace", "eta": eta},
        singular_points=(0.0,),
    )


def flip_error(a: ErrorModel) -> ErrorModel:
    """Law of ``-eps``."""
    if a.density is None:
        return a
    dens = a.density
    smp = a.sampler
    spec = {k: v for k, v in a.spec.items() if k != "flip"}
    if not a.spec.get("flip", False):
        spec["flip"] = True
    return ErrorModel(
        name=f"flip({a.name})",
        beta=a.beta,
        cf=lambda u: a.cf(-np.asarray(u, dtype=float)),
        cf_recip=lambda u: a.cf_recip(-np.asarray(u, dtype=float)),
        cf_recip_deriv=lambda u: -a.cf_recip_deriv(-np.asarray(u, dtype=float)),
        density=lambda x: dens(-np.asarray(x, dtype=float)),
        sampler=lambda rng, n: -smp(rng, n),
        mean=-a.mean,
        var=a.var,
        spec=spec,
        singular_points=tuple(-p for p in a.singular_points),
    )


def no_noise() -> ErrorModel:
    """Point mass at zero: ``cf == 1`` and ``beta = 0``."""

    def one(u):
        return np.ones_like(np.asarray(u, dtype=float), dtype=complex)

    def zero(u):
        return np.zeros_like(np.asarray(u, dtype=float), dtype=complex)

    return ErrorModel(
        name="none",
        beta=0.0,
        cf=one,
        cf_recip=one,
        cf_recip_deriv=zero,
        density=None,
        sampler=lambda rng, n: np.zeros(n),
        mean=0.0,
        var=0.0,
        spec={"kind": "none"},
    )


def _convolved_density(a: ErrorModel, b: ErrorModel):
    fa, fb = a.density, b.density
    pa = a.singular_points

    def one_point(x):
        brk = sorted({*pa, *(x - p for p in b.singular_points)})
        lo, hi = brk[0] - 60.0 * (a.sd + b.sd), brk[-1] + 60.0 * (a.sd + b.sd)
        edges = [lo, *brk, hi]
        return sum(
            integrate.quad(lambda y: fa(y) * fb(x - y), l, r, limit=200, epsabs=1e-12)[0]
            for l, r in zip(edges[:-1], edges[1:])
            if r > l
        )

    def dens(x):
        xa = np.asarray(x, dtype=float)
        out = np.array([one_point(v) for v in xa.ravel()]).reshape(xa.shape)
        return out if xa.ndim else float(out)

    return dens


def convolve_errors(a: ErrorModel, b: ErrorModel) -> ErrorModel:
    """Law of the sum of independent errors from ``a`` and ``b``.

    The density is computed by adaptive quadrature on demand; it is slow and
    meant for oracles and plots, never for the estimator itself.
    """
    if a.density is None:
        return b
    if b.density is None:
        return a

    def cf(u):
        return a.cf(u) * b.cf(u)

    def cf_recip(u):
        return a.cf_recip(u) * b.cf_recip(u)

    def cf_recip_deriv(u):
        return a.cf_recip_deriv(u) * b.cf_recip(u) + a.cf_recip(u) * b.cf_recip_deriv(u)

    return ErrorModel(
        name=f"{a.name}*{b.name}",
        beta=a.beta + b.beta,
        cf=cf,
        cf_recip=cf_recip,
        cf_recip_deriv=cf_recip_deriv,
        density=_convolved_density(a, b),
        sampler=lambda rng, n: a.sampler(rng, n) + b.sampler(rng, n),
        mean=a.mean + b.mean,
        var=a.var + b.var,
        spec={"kind": "convolution", "parts": [a.spec, b.spec]},
        singular_points=tuple(sorted({p + q for p in a.singular_points for q in b.singular_points})),
    )


def decay_ratios(em: ErrorModel, umax: float = 1e4, points: int = 20001):
    """Return ``sup |1/cf|/<u>**beta`` and ``sup |(1/cf)'|/<u>**(beta-1)`` on ``|u| <= umax``.

    Both are finite constants for a law satisfying the ordinary smooth decay
    condition; the sweep is logarithmic so large ``|u|`` is well covered.
    """
    pos = np.concatenate([[0.0], np.logspace(-3, np.log10(umax), points // 2)])
    u = np.concatenate([-pos[::-1], pos[1:]])
    br = np.sqrt(1.0 + u**2)
    r0 = np.max(np.abs(em.cf_recip(u)) / br**em.beta)
    r1 = np.max(np.abs(em.cf_recip_deriv(u)) / br ** (em.beta - 1.0))
    return float(r0), float(r1)


def from_spec(spec: dict) -> ErrorModel:
    """Build an error model from its config description.

    Kinds: ``{"kind": "gamma", "beta", "eta", "flip"?}``,
    ``{"kind": "laplace", "eta"}``, ``{"kind": "convolution", "parts": [...]}``
    and ``{"kind": "none"}``.
    """
    kind = spec.get("kind")
    if kind == "gamma":
        em = gamma_error(spec["beta"], spec.get("eta", 1.0))
        return flip_error(em) if spec.get("flip") else em
    if kind == "laplace":
        return laplace_error(spec.get("eta", 1.0))
    if kind == "convolution":
        parts = spec.get("parts") or []
        if not parts:
            raise InvalidParam("convolution error needs a non-empty 'parts' list")
        out = no_noise()
        for p in parts:
            out = convolve_errors(out, from_spec(p))
        return out
    if kind == "none":
        return no_noise()
    raise InvalidParam(f"unknown error kind {kind!r}")
