"""Band-limited flat-top kernels.

The Fourier transform ``FK`` equals one on ``[-c, c]``, vanishes outside
``[-1, 1]`` and joins the two with the C-infinity ramp
``psi(s) = exp(-exp(-1/s) / (1 - s))``.  Because every derivative of ``FK``
vanishes at the origin, all polynomial moments of ``K`` beyond the zeroth are
zero.  :func:`certify_moments` confirms this with ball arithmetic, since the
heavy stretched-exponential tails of ``K`` make a float64 check of high
moments meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InvalidBandwidth, InvalidRadius
from .grid import Grid, GridFunction

__all__ = [
    "Kernel",
    "flat_top_ft",
    "build_flat_top",
    "scale",
    "certify_moments",
    "decay_constant",
]

_MOMENT_TOL = 1e-8
_MASS_TOL = 1e-10


def _ramp(s):
    """psi on the open interval (0, 1); 1 at s <= 0 and 0 at s >= 1."""
    s = np.asarray(s, dtype=float)
    out = np.where(s <= 0.0, 1.0, 0.0)
    inner = (s > 0.0) & (s < 1.0)
    si = s[inner]
    with np.errstate(over="ignore", under="ignore"):
        out[inner] = np.exp(-np.exp(-1.0 / si) / (1.0 - si))
    return out


def flat_top_ft(u, c: float):
    """Evaluate ``FK(u)`` for the flat-top kernel with flat radius ``c``."""
    a = np.abs(np.asarray(u, dtype=float))
    out = _ramp((a - c) / (1.0 - c))
    return out if np.ndim(u) else float(out)


@lru_cache(maxsize=8)
def _gauss_legendre(c: float, panels: int, order: int = 12):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(c, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _ramp_nodes(c: float, xmax: float):
    # about one panel per half-oscillation of cos(u x) over the ramp
    panels = int(max(64, np.ceil(xmax * (1.0 - c) / np.pi) * 2))
    nodes, weights = _gauss_legendre(c, panels)
    return nodes, weights * flat_top_ft(nodes, c)


@dataclass(frozen=True)
class Kernel:
    """A flat-top kernel.

    Attributes
    ----------
    flat_radius : float
        ``c`` with ``FK = 1`` on ``[-c, c]``.
    fk : GridFunction
        Samples of ``FK`` on ``[-1, 1]`` (zero outside).
    order : int
        Highest moment order certified to vanish.
    moments : tuple of float
        Certified values of ``int x**l K(x) dx`` for ``l = 0..order``.
    moment_radii : tuple of float
        Rigorous error radii of ``moments``.
    decay : float
        ``sup <x>**2 (|K| + |K'|)`` over ``|x| <= 200``.
    """

    flat_radius: float
    fk: GridFunction
    order: int
    moments: tuple
    moment_radii: tuple
    decay: float

    def ft(self, u):
        return flat_top_ft(u, self.flat_radius)

    def values(self, x):
        """``K(x) = (1/pi) int_0^1 FK(u) cos(ux) du``."""
        c = self.flat_radius
        shape = np.shape(x)
        xa = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        nodes, w = _ramp_nodes(c, float(np.max(np.abs(xa), initial=0.0)))
        flat = c * np.sinc(c * xa / np.pi)
        ramp = np.cos(np.outer(xa, nodes)) @ w
        out = (flat + ramp) / np.pi
        return out.reshape(shape) if shape else float(out[0])

    def derivative(self, x):
        """``K'(x) = -(1/pi) int_0^1 u FK(u) sin(ux) du``."""
        c = self.flat_radius
        shape = np.shape(x)
        xa = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        nodes, w = _ramp_nodes(c, float(np.max(np.abs(xa), initial=0.0)))
        small = np.abs(xa) < 1e-3
        xs = np.where(small, 1.0, xa)
        flat = np.where(
            small,
            c**3 * xa / 3.0 - c**5 * xa**3 / 30.0,
            (np.sin(c * xs) - c * xs * np.cos(c * xs)) / xs**2,
        )
        ramp = np.sin(np.outer(xa, nodes)) @ (w * nodes)
        out = -(flat + ramp) / np.pi
        return out.reshape(shape) if shape else float(out[0])

    @property
    def certified(self) -> bool:
        ok_mass = abs(self.moments[0] - 1.0) + self.moment_radii[0] < _MASS_TOL
        ok_rest = all(
            abs(m) + r < _MOMENT_TOL for m, r in zip(self.moments[1:], self.moment_radii[1:])
        )
        return ok_mass and ok_rest and np.isfinite(self.decay)


def certify_moments(c: float, order: int = 6, m: int | None = None, dx: float = 1.0, prec: int = 240):
    """Moments ``int x**l K(x) dx``, ``l = 0..order``, in ball arithmetic.

    ``K`` is sampled at spacing ``dx < pi`` through an exact DFT of ``FK`` on
    ``m`` frequencies.  By Poisson summation the lattice sum
    ``dx * sum_k x_k**l K(x_k)`` equals the integral up to the periodic tail
    beyond ``m*dx/2``, which is far below the tolerance for the default sizes.

    Returns
    -------
    mids, radii : tuple of float
    """
    from flint import acb, arb, ctx

    if m is None:
        m = 2**15 if order <= 6 else 2**17
    old = ctx.prec
    ctx.prec = prec
    try:
        ca = arb(float(c))
        one = arb(1)

        def fk(u):
            a = abs(u)
            if a <= ca:
                return one
            if a >= one:
                return arb(0)
            s = (a - ca) / (one - ca)
            return (-(-one / s).exp() / (one - s)).exp()

        period = arb(m) * arb(float(dx))
        du = 2 * arb.pi() / period
        jmax = int((one / du).floor().unique_fmpz()) + 1
        vals = [acb(0)] * m
        for j in range(-jmax, jmax + 1):
            vals[j % m] = acb(fk(j * du))
        spec = acb.dft(vals)
        kvals = [s.real / period for s in spec]
        xs = [arb((k if k < m // 2 else k - m) * float(dx)) for k in range(m)]
        mids, rads = [], []
        for ell in range(order + 1):
            acc = arb(0)
            for xk, kk in zip(xs, kvals):
                acc += kk if ell == 0 else xk**ell * kk
            acc *= arb(float(dx))
            mids.append(float(acc.mid()))
            rads.append(float(acc.rad()))
        return tuple(mids), tuple(rads)
    finally:
        ctx.prec = old


def decay_constant(k: "Kernel | float", xmax: float = 200.0, points: int = 8001) -> float:
    """``sup <x>**2 (|K(x)| + |K'(x)|)`` sampled on ``|x| <= xmax``."""
    x = np.linspace(-xmax, xmax, points)
    if not isinstance(k, Kernel):
        k = _bare_kernel(float(k))
    return float(np.max((1.0 + x**2) * (np.abs(k.values(x)) + np.abs(k.derivative(x)))))


def _bare_kernel(c: float) -> Kernel:
    fk = GridFunction.sample(Grid(-1.0, 1.0, 1024), lambda u: flat_top_ft(u, c))
    return Kernel(c, fk, 0, (1.0,), (0.0,), float("nan"))


@lru_cache(maxsize=16)
def build_flat_top(flat_radius: float = 0.5, order: int = 6) -> Kernel:
    """Build and certify a flat-top kernel.

    Parameters
    ----------
    flat_radius : float
        ``c`` in ``(0, 1)``.
    order : int
        Moment order to certify.  Orders above 6 switch to a larger lattice
        and take a few seconds.

    Raises
    ------
    InvalidRadius
        If ``flat_radius`` is not in ``(0, 1)``.
    """
    c = float(flat_radius)
    if not (0.0 < c < 1.0) or not np.isfinite(c):
        raise InvalidRadius(f"flat radius must lie in (0, 1), got {flat_radius}")
    bare = _bare_kernel(c)
    mids, rads = certify_moments(c, order)
    return Kernel(c, bare.fk, int(order), mids, rads, decay_constant(bare))


def scale(k: Kernel, h: float, grid: Grid) -> GridFunction:
    """Spectrum of ``K_h(x) = K(x/h)/h``, i.e. ``FK(h u)`` on the dual of ``grid``."""
    if not (np.isfinite(h) and h > 0):
        raise InvalidBandwidth(f"bandwidth must be positive, got {h}")
    return GridFunction.spectrum(grid, lambda u: k.ft(h * u) + 0j)
