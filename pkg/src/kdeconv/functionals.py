"""Test functions ``zeta`` whose translates define the targets ``theta_t = <zeta(. - t), f_X>``.

Every functional except the indicator has a closed-form Fourier transform.
``gamma_s`` is the Sobolev index of the rough part of ``zeta``; the sqrt(n)
theory needs ``gamma_s > beta`` for the error's decay index ``beta``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special, stats

from .exceptions import AdmissibilityWarning, InvalidParam, UnsupportedRoute

__all__ = [
    "Functional",
    "indicator",
    "triangle",
    "flipped_gamma",
    "gaussian",
    "translate_ft",
    "check_admissible",
    "from_spec",
]

# declared indices sit just below the supremum of admissible values
_MARGIN = 0.01


@dataclass(frozen=True)
class Functional:
    """A test function ``zeta`` with its smoothness metadata.

    Attributes
    ----------
    kind : str
        ``"indicator"``, ``"triangle"``, ``"flipped_gamma"`` or ``"gaussian"``.
    gamma_s, gamma_c : float
        Declared smoothness indices of the rough and smooth parts.
    params : dict
        Constructor arguments.
    ft : callable or None
        ``u -> F zeta(u)``; ``None`` for the indicator.
    evaluate : callable
        ``x -> zeta(x)``.
    support : tuple of float
        Interval outside which ``|zeta|`` is negligible (``1e-16`` relative).
        The indicator reports ``(-inf, 0)``.
    singular_points : tuple of float
        Points where ``zeta`` is unbounded or not smooth.
    """

    kind: str
    gamma_s: float
    gamma_c: float
    params: dict = field(compare=False)
    ft: Callable | None = field(compare=False)
    evaluate: Callable = field(compare=False)
    support: tuple = (-np.inf, np.inf)
    singular_points: tuple = ()

    def __call__(self, x):
        return self.evaluate(x)

    @property
    def support_radius(self) -> float:
        """Largest finite distance from 0 to the support edge; 0 for half-lines."""
        ends = [abs(e) for e in self.support if np.isfinite(e)]
        return float(max(ends, default=0.0))

    @property
    def spec(self) -> dict:
        return {"kind": self.kind, **self.params}

    def scaled(self, a: float) -> "Functional":
        """``a * zeta``."""
        ft, ev = self.ft, self.evaluate
        return Functional(
            self.kind,
            self.gamma_s,
            self.gamma_c,
            {**self.params, "scale": a * self.params.get("scale", 1.0)},
            None if ft is None else (lambda u: a * ft(u)),
            lambda x: a * ev(x),
            self.support,
            self.singular_points,
        )


def _positive(**kw):
    for k, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise InvalidParam(f"{k} must be positive and finite, got {v}")


def indicator() -> Functional:
    """``zeta = 1_{(-inf, 0]}``, so ``theta_t`` is the distribution function at ``t``."""

    def ev(x):
        return (np.asarray(x, dtype=float) <= 0.0).astype(float)

    return Functional("indicator", 0.5 - _MARGIN, np.inf, {}, None, ev, (-np.inf, 0.0), (0.0,))


def triangle(width: float = 1.0) -> Functional:
    """``zeta(x) = max(width - |x|, 0)`` with ``F zeta(u) = 4 sin(width u / 2)**2 / u**2``."""
    _positive(width=width)
    w = float(width)

    def ft(u):
        u = np.asarray(u, dtype=float)
        half = 0.5 * w * u
        # w**2 * sinc(half)**2 is the same formula without the 0/0 at u = 0
        return (w**2 * np.sinc(half / np.pi) ** 2) + 0j

    def ev(x):
        return np.maximum(w - np.abs(np.asarray(x, dtype=float)), 0.0)

    return Functional("triangle", 1.5 - _MARGIN, np.inf, {"width": w}, ft, ev, (-w, w), (-w, 0.0, w))


def flipped_gamma(sigma: float, eta: float = 1.0) -> Functional:
    """``zeta(x) = gamma_{sigma,eta}(-x)`` with ``F zeta(u) = (1 + i eta u)**(-sigma)``.

    The Sobolev index of this function is ``sigma - 1/2``.
    """
    _positive(sigma=sigma, eta=eta)
    s, e = float(sigma), float(eta)
    law = stats.gamma(s, scale=e)

    def ft(u):
        return (1.0 + 1j * e * np.asarray(u, dtype=float)) ** (-s)

    def ev(x):
        xa = np.asarray(x, dtype=float)
        y = -xa
        pos = y > 0
        out = np.zeros_like(y)
        yp = y[pos]
        out[pos] = np.exp((s - 1.0) * np.log(yp) - yp / e - special.gammaln(s) - s * np.log(e))
        if s == 1.0:
            out[y == 0] = 1.0 / e
        elif s < 1.0:
            out[y == 0] = np.inf
        return out if xa.ndim else float(out)

    reach = float(law.isf(1e-16))
    sing = (0.0,) if s <= 2.0 else ()
    return Functional(
        "flipped_gamma", s - 0.5 - _MARGIN, np.inf, {"sigma": s, "eta": e}, ft, ev, (-reach, 0.0), sing
    )


def gaussian(sd: float = 1.0) -> Functional:
    """Normal density with standard deviation ``sd``; ``F zeta(u) = exp(-sd**2 u**2 / 2)``."""
    _positive(sd=sd)
    sd = float(sd)

    def ft(u):
        u = np.asarray(u, dtype=float)
        return np.exp(-0.5 * (sd * u) ** 2) + 0j

    def ev(x):
        return stats.norm.pdf(np.asarray(x, dtype=float), scale=sd)

    r = 8.6 * sd
    return Functional("gaussian", np.inf, np.inf, {"sd": sd}, ft, ev, (-r, r), ())


def translate_ft(f: Functional, t: float, u):
    """Fourier transform of ``zeta(. - t)``, i.e. ``exp(i u t) F zeta(u)``."""
    if f.ft is None:
        raise UnsupportedRoute(f"{f.kind} has no closed-form Fourier transform")
    u = np.asarray(u, dtype=float)
    return np.exp(1j * u * t) * f.ft(u)


def check_admissible(f: Functional, beta: float) -> bool:
    """Warn (and return False) when ``gamma_s <= beta``."""
    if f.gamma_s <= beta:
        warnings.warn(
            f"{f.kind}: gamma_s={f.gamma_s:g} <= beta={beta:g}; sqrt(n) behaviour is not expected",
            AdmissibilityWarning,
            stacklevel=2,
        )
        return False
    return True


def from_spec(spec: dict) -> Functional:
    kind = spec.get("kind")
    try:
        if kind == "indicator":
            f = indicator()
        elif kind == "triangle":
            f = triangle(spec.get("width", 1.0))
        elif kind == "flipped_gamma":
            f = flipped_gamma(spec["sigma"], spec.get("eta", 1.0))
        elif kind == "gaussian":
            f = gaussian(spec.get("sd", 1.0))
        else:
            raise InvalidParam(f"unknown functional kind {kind!r}")
    except KeyError as exc:
        raise InvalidParam(f"functional {kind!r} is missing parameter {exc}") from None
    if "scale" in spec:
        f = f.scaled(float(spec["scale"]))
    return f
