"""Uniform periodic grids and the Fourier transform ``Ff(u) = int e^{iux} f(x) dx``.

A :class:`Grid` holds ``m`` nodes ``lo + k*step`` for ``k = 0..m-1`` with
``step = (hi - lo)/m``; the point ``hi`` is identified with ``lo``.  Its dual
frequency grid has nodes ``(j - m/2) * 2*pi/(m*step)`` covering
``[-pi/step, pi/step)``.  All transforms are exact DFT identities on these
nodes, so ``inverse_transform(forward_transform(f))`` is the identity up to
rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParam, OutOfDomain, ValidationError

__all__ = [
    "Grid",
    "GridFunction",
    "forward_transform",
    "inverse_transform",
    "interpolate",
    "integrate",
    "cumulative",
    "antiderivative",
    "convolve",
]

_REAL_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    m: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi <= self.lo:
            raise InvalidParam(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        m = int(self.m)
        if m < 8 or m & (m - 1):
            raise InvalidParam(f"grid size must be a power of two >= 8, got {self.m}")
        object.__setattr__(self, "m", m)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / self.m

    @property
    def freq_step(self) -> float:
        return 2.0 * np.pi / (self.m * self.step)

    @property
    def nyquist(self) -> float:
        return np.pi / self.step

    def nodes(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.m)

    def dual(self) -> "Grid":
        return Grid(-self.nyquist, self.nyquist, self.m)

    def refine(self, factor: int) -> "Grid":
        """Same interval, ``factor`` times more nodes; coarse nodes are a subset."""
        return Grid(self.lo, self.hi, self.m * int(factor))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    @classmethod
    def covering(cls, lo: float, hi: float, m: int) -> "Grid":
        return cls(float(lo), float(hi), m)


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on a :class:`Grid`.

    ``spatial`` is set for spectra: ``grid`` is then the dual (frequency) grid
    and ``spatial`` the x-grid the spectrum belongs to, which fixes the phase
    used by :func:`inverse_transform`.  Real-tagged functions store float
    values after checking that the imaginary part is negligible.
    """

    grid: Grid
    values: np.ndarray
    real: bool = False
    spatial: Grid | None = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.m,):
            raise InvalidParam(f"expected {self.grid.m} values, got shape {v.shape}")
        if self.real:
            if np.iscomplexobj(v):
                scale = np.max(np.abs(v)) if v.size else 0.0
                if np.max(np.abs(v.imag)) > _REAL_TOL * max(scale, np.finfo(float).tiny):
                    raise ValidationError("function tagged real has a non-negligible imaginary part")
                v = v.real
            v = np.array(v, dtype=float)
        else:
            v = np.array(v, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, grid: Grid, func, real: bool = True) -> "GridFunction":
        return cls(grid, func(grid.nodes()), real=real)

    @classmethod
    def spectrum(cls, spatial: Grid, func) -> "GridFunction":
        dual = spatial.dual()
        return cls(dual, func(dual.nodes()), spatial=spatial)

    @property
    def is_spectrum(self) -> bool:
        return self.spatial is not None

    def nodes(self) -> np.ndarray:
        return self.grid.nodes()

    def with_values(self, values, real: bool | None = None) -> "GridFunction":
        return GridFunction(self.grid, values, self.real if real is None else real, self.spatial)

    def __call__(self, x):
        return interpolate(self, x)


def _alternating(m: int) -> np.ndarray:
    s = np.ones(m)
    s[1::2] = -1.0
    return s


def forward_transform(f: GridFunction) -> GridFunction:
    if f.is_spectrum:
        raise ValidationError("forward_transform expects an x-space function")
    g = f.grid
    u = g.dual().nodes()
    vals = g.step * g.m * np.exp(1j * u * g.lo) * np.fft.ifft(f.values * _alternating(g.m))
    return GridFunction(g.dual(), vals, spatial=g)


def inverse_transform(F: GridFunction, real: bool = False) -> GridFunction:
    if not F.is_spectrum:
        raise ValidationError("inverse_transform expects a spectrum (GridFunction with spatial grid)")
    g = F.spatial
    u = F.grid.nodes()
    w = F.values * np.exp(-1j * u * g.lo)
    if real:
        # the Nyquist bin has no conjugate partner; keep its real-output part
        w[0] = w[0].real
    vals = _alternating(g.m) * np.fft.fft(w) / (g.m * g.step)
    return GridFunction(g, vals, real=real)


def _lagrange_weights(s: np.ndarray) -> tuple[np.ndarray, ...]:
    # cubic through nodes -1, 0, 1, 2 at offset s in [0, 1)
    return (
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    )


def interpolate(f: GridFunction, x):
    """Local cubic (four-point Lagrange) interpolation, periodic at the ends.

    Exact at nodes and for cubic polynomials; error is O(step**4) for smooth
    functions.  Raises :class:`OutOfDomain` for points outside ``[lo, hi]``.
    """
    g = f.grid
    xa = np.asarray(x, dtype=float)
    if not np.all(g.contains(xa)):
        bad = xa[~g.contains(xa)]
        raise OutOfDomain(
            f"{bad.size} point(s) outside [{g.lo:.6g}, {g.hi:.6g}], e.g. {bad.flat[0]:.6g}"
        )
    pos = (xa - g.lo) / g.step
    i = np.floor(pos).astype(np.int64)
    s = pos - i
    w = _lagrange_weights(s)
    v = f.values
    out = sum(wk * v[(i + k - 1) % g.m] for k, wk in enumerate(w))
    return out if np.ndim(x) else out[()]


def integrate(f: GridFunction):
    """Trapezoid rule over one period (``hi`` identified with ``lo``)."""
    return f.grid.step * np.sum(f.values)


def cumulative(f: GridFunction) -> GridFunction:
    """Running integral ``F(x_k) = int_lo^{x_k} f`` with ``F(lo) = 0``.

    Each cell is integrated exactly for the local cubic used by
    :func:`interpolate`, which is a trapezoid step plus an O(step**2) end
    correction; the result is fourth-order accurate.
    """
    if not f.real:
        raise ValidationError("cumulative expects a real-tagged function")
    v = f.values
    inc = (13.0 * (v + np.roll(v, -1)) - np.roll(v, 1) - np.roll(v, -2)) * (f.grid.step / 24.0)
    out = np.empty_like(v)
    out[0] = 0.0
    np.cumsum(inc[:-1], out=out[1:])
    return GridFunction(f.grid, out, real=True)


def _lagrange_integrals(s: np.ndarray) -> tuple[np.ndarray, ...]:
    # integrals over [0, s] of the weights in _lagrange_weights
    s2, s3, s4 = s * s, s**3, s**4 / 4.0
    return (
        -(s4 - s3 + s2) / 6.0,
        (s4 - 2.0 * s3 / 3.0 - s2 / 2.0 + 2.0 * s) / 2.0,
        -(s4 - s3 / 3.0 - s2) / 2.0,
        (s4 - s2 / 2.0) / 6.0,
    )


def antiderivative(f: GridFunction, x):
    """``int_lo^x f`` at arbitrary points, consistent with :func:`cumulative`.

    The running integral is taken at the node below ``x`` and the partial
    cell is integrated exactly for the local cubic of :func:`interpolate`.
    """
    g = f.grid
    xa = np.asarray(x, dtype=float)
    if not np.all(g.contains(xa)):
        raise OutOfDomain(f"points outside [{g.lo:.6g}, {g.hi:.6g}]")
    big = cumulative(f).values
    pos = (xa - g.lo) / g.step
    i = np.minimum(np.floor(pos).astype(np.int64), g.m - 1)
    s = pos - i
    v = f.values
    part = sum(wk * v[(i + k - 1) % g.m] for k, wk in enumerate(_lagrange_integrals(s)))
    out = big[i] + g.step * part
    return out if np.ndim(x) else out[()]


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Linear convolution of two x-space functions with equal step and size.

    Both inputs are zero-padded to twice their length so the circular DFT
    product equals the linear convolution.  The result lives on a grid of
    ``2m`` nodes starting at ``f.lo + g.lo``.
    """
    if f.grid.m != g.grid.m or not np.isclose(f.grid.step, g.grid.step, rtol=1e-12):
        raise ValidationError("convolve needs grids with equal size and step")
    m, h = f.grid.m, f.grid.step
    n = 2 * m
    vals = np.fft.ifft(np.fft.fft(f.values, n) * np.fft.fft(g.values, n)) * h
    lo = f.grid.lo + g.grid.lo
    grid = Grid(lo, lo + n * h, n)
    return GridFunction(grid, vals, real=f.real and g.real)
