"""Laws of the unobserved signal ``X`` used to simulate data and compute truths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .exceptions import InvalidParam

__all__ = ["SignalLaw", "gamma_signal", "normal_signal", "mixture_signal", "from_spec"]


@dataclass(frozen=True)
class SignalLaw:
    """A parametric law for ``X``.

    ``alpha`` is the declared Sobolev smoothness of the density, used by the
    bandwidth rules.  A gamma density with shape ``a`` has index ``a - 1/2``;
    normal laws and their mixtures are infinitely smooth.
    """

    kind: str
    params: dict
    alpha: float
    _parts: tuple = field(repr=False, compare=False, default=())
    _weights: tuple = field(repr=False, compare=False, default=())

    @property
    def spec(self) -> dict:
        return {"kind": self.kind, **self.params}

    def pdf(self, x):
        return sum(w * p.pdf(x) for w, p in zip(self._weights, self._parts))

    def cdf(self, x):
        return sum(w * p.cdf(x) for w, p in zip(self._weights, self._parts))

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "gamma":
            return (1.0 - 1j * self.params["scale"] * u) ** (-self.params["shape"])
        return sum(
            w * np.exp(1j * u * p.mean() - 0.5 * (p.std() * u) ** 2)
            for w, p in zip(self._weights, self._parts)
        )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if len(self._parts) == 1:
            return self._draw(self._parts[0], rng, n)
        comp = rng.choice(len(self._parts), size=n, p=np.asarray(self._weights))
        out = np.empty(n)
        for k, p in enumerate(self._parts):
            idx = comp == k
            out[idx] = self._draw(p, rng, int(idx.sum()))
        return out

    def _draw(self, p, rng, n):
        if self.kind == "gamma":
            return rng.gamma(self.params["shape"], self.params["scale"], size=n)
        return rng.normal(p.mean(), p.std(), size=n)

    def mean(self) -> float:
        return float(sum(w * p.mean() for w, p in zip(self._weights, self._parts)))

    def var(self) -> float:
        m = self.mean()
        return float(sum(w * (p.var() + p.mean() ** 2) for w, p in zip(self._weights, self._parts)) - m**2)

    def ppf(self, q: float) -> float:
        if len(self._parts) == 1:
            return float(self._parts[0].ppf(q))
        # every component is below q at lo and above q at hi
        lo = min(p.ppf(0.5 * q) for p in self._parts)
        hi = max(p.ppf(0.5 * (1.0 + q)) for p in self._parts)
        return float(optimize.brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-14))

    def median(self) -> float:
        return self.ppf(0.5)

    def support(self, tail: float = 1e-12) -> tuple[float, float]:
        return self.ppf(tail), self.ppf(1.0 - tail)


def _positive(**kw):
    for k, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise InvalidParam(f"{k} must be positive and finite, got {v}")


def gamma_signal(shape: float, scale: float = 1.0) -> SignalLaw:
    _positive(shape=shape, scale=scale)
    shape, scale = float(shape), float(scale)
    return SignalLaw(
        "gamma",
        {"shape": shape, "scale": scale},
        shape - 0.5 - 0.01,
        (stats.gamma(shape, scale=scale),),
        (1.0,),
    )


def normal_signal(mean: float = 0.0, sd: float = 1.0) -> SignalLaw:
    _positive(sd=sd)
    return SignalLaw(
        "normal", {"mean": float(mean), "sd": float(sd)}, np.inf, (stats.norm(mean, sd),), (1.0,)
    )


def mixture_signal(weights, means, sds) -> SignalLaw:
    w = np.asarray(weights, dtype=float)
    if w.shape != (2,) or len(means) != 2 or len(sds) != 2:
        raise InvalidParam("mixture needs exactly two components")
    if np.any(w <= 0) or not np.isclose(w.sum(), 1.0):
        raise InvalidParam("mixture weights must be positive and sum to one")
    for s in sds:
        _positive(sd=s)
    return SignalLaw(
        "mixture",
        {"weights": list(map(float, w)), "means": list(map(float, means)), "sds": list(map(float, sds))},
        np.inf,
        tuple(stats.norm(m, s) for m, s in zip(means, sds)),
        tuple(w),
    )


def from_spec(spec: dict) -> SignalLaw:
    kind = spec.get("kind")
    try:
        if kind == "gamma":
            return gamma_signal(spec["shape"], spec.get("scale", 1.0))
        if kind == "normal":
            return normal_signal(spec.get("mean", 0.0), spec.get("sd", 1.0))
        if kind == "mixture":
            return mixture_signal(spec["weights"], spec["means"], spec["sds"])
    except KeyError as exc:
        raise InvalidParam(f"signal {kind!r} is missing parameter {exc}") from None
    raise InvalidParam(f"unknown signal kind {kind!r}")
