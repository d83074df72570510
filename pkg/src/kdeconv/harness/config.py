"""Scenario configuration: dataclasses, JSON I/O and validation.

A config file is a JSON object; see ``configs/schema.json`` for the full
schema and ``configs/*.json`` for examples.  Only ``signal``, ``error`` and
``functional`` are required.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .. import error_models, functionals, signals
from ..estimator import bandwidth_classical, bandwidth_rate
from ..exceptions import ConfigError, ValidationError

__all__ = ["BandwidthSpec", "TGridSpec", "ScenarioConfig", "load_config"]


@dataclass(frozen=True)
class BandwidthSpec:
    """``rule`` is ``"rate"``, ``"classical"`` or ``"fixed"``.

    ``constant`` multiplies the rate rules; ``h`` is used by ``"fixed"``.
    """

    rule: str = "rate"
    constant: float = 1.0
    h: float | None = None


@dataclass(frozen=True)
class TGridSpec:
    """``kind`` is ``"quantile"`` (sample quantiles ``lo``..``hi``),
    ``"linspace"`` (absolute ``lo``..``hi``) or ``"values"``."""

    kind: str = "quantile"
    points: int = 101
    lo: float = 0.01
    hi: float = 0.99
    values: tuple | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    signal: dict
    error: dict
    functional: dict
    kernel: dict = field(default_factory=lambda: {"flat_radius": 0.5})
    bandwidth: BandwidthSpec = field(default_factory=BandwidthSpec)
    n: int = 1000
    replications: int = 100
    alpha: float = 0.05
    t_grid: TGridSpec = field(default_factory=TGridSpec)
    seed: int = 0
    sup_reps: int = 2000
    n_list: tuple = (500, 2000, 8000)
    t_star: float | str = "median"
    grid_m: int = 2**13
    smoothness: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    # construction ---------------------------------------------------------

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("signal", "error", "functional"):
            if key not in d:
                raise ConfigError(f"config is missing {key!r}")
        kw = dict(d)
        try:
            if "bandwidth" in kw:
                kw["bandwidth"] = BandwidthSpec(**kw["bandwidth"])
            if "t_grid" in kw:
                tg = dict(kw["t_grid"])
                if tg.get("values") is not None:
                    tg["values"] = tuple(float(v) for v in tg["values"])
                kw["t_grid"] = TGridSpec(**tg)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        if "n_list" in kw:
            kw["n_list"] = tuple(int(v) for v in kw["n_list"])
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_list"] = list(self.n_list)
        if d["t_grid"]["values"] is not None:
            d["t_grid"]["values"] = list(d["t_grid"]["values"])
        return d

    def with_overrides(self, **kw) -> "ScenarioConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    # validation -----------------------------------------------------------

    def validate(self) -> None:
        try:
            self.build_signal()
            self.build_error()
            self.build_functional()
        except ValidationError as exc:
            raise ConfigError(str(exc)) from None
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad component spec: {exc}") from None
        if int(self.n) < 2:
            raise ConfigError("n must be at least 2")
        if int(self.replications) < 1:
            raise ConfigError("replications must be at least 1")
        if not 0.0 < float(self.alpha) < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if int(self.sup_reps) < 1:
            raise ConfigError("sup_reps must be positive")
        fr = self.kernel.get("flat_radius", 0.5)
        if not 0.0 < fr < 1.0:
            raise ConfigError("kernel.flat_radius must lie in (0, 1)")
        bw = self.bandwidth
        if bw.rule not in ("rate", "classical", "fixed"):
            raise ConfigError(f"unknown bandwidth rule {bw.rule!r}")
        if bw.rule == "fixed" and not (bw.h is not None and bw.h > 0):
            raise ConfigError("fixed bandwidth needs a positive 'h'")
        if not bw.constant > 0:
            raise ConfigError("bandwidth constant must be positive")
        tg = self.t_grid
        if tg.kind not in ("quantile", "linspace", "values"):
            raise ConfigError(f"unknown t_grid kind {tg.kind!r}")
        if tg.kind == "values" and not tg.values:
            raise ConfigError("t_grid kind 'values' needs a non-empty 'values' list")
        if tg.kind != "values" and (tg.points < 1 or not tg.lo <= tg.hi):
            raise ConfigError("t_grid needs points >= 1 and lo <= hi")
        if tg.kind == "quantile" and not (0.0 <= tg.lo and tg.hi <= 1.0):
            raise ConfigError("quantile t_grid bounds must lie in [0, 1]")
        if any(v < 2 for v in self.n_list):
            raise ConfigError("n_list entries must be at least 2")
        if not (isinstance(self.t_star, (int, float)) or self.t_star == "median"):
            raise ConfigError("t_star must be a number or 'median'")
        m = int(self.grid_m)
        if m < 8 or m & (m - 1):
            raise ConfigError("grid_m must be a power of two >= 8")
        for key in self.smoothness:
            if key not in ("alpha", "beta", "gamma_s"):
                raise ConfigError(f"unknown smoothness key {key!r}")

    # components -----------------------------------------------------------

    def build_signal(self) -> signals.SignalLaw:
        return signals.from_spec(self.signal)

    def build_error(self) -> error_models.ErrorModel:
        return error_models.from_spec(self.error)

    def build_functional(self) -> functionals.Functional:
        return functionals.from_spec(self.functional)

    def indices(self) -> dict:
        """Declared ``alpha``, ``beta`` and ``gamma_s``, with config overrides applied."""
        out = {
            "alpha": self.build_signal().alpha,
            "beta": self.build_error().beta,
            "gamma_s": self.build_functional().gamma_s,
        }
        out.update({k: float(v) for k, v in self.smoothness.items()})
        return out

    def bandwidth_for(self, n: int) -> float:
        bw = self.bandwidth
        if bw.rule == "fixed":
            return float(bw.h)
        ix = self.indices()
        if bw.rule == "rate":
            return bandwidth_rate(n, ix["alpha"], ix["beta"], ix["gamma_s"], bw.constant)
        return bandwidth_classical(n, ix["alpha"], ix["beta"], bw.constant)

    def t_values(self, y=None) -> np.ndarray:
        tg = self.t_grid
        if tg.kind == "values":
            return np.asarray(tg.values, dtype=float)
        if tg.kind == "linspace":
            return np.linspace(tg.lo, tg.hi, tg.points)
        if y is None:
            raise ConfigError("quantile t_grid needs data")
        a, b = np.quantile(np.asarray(y, dtype=float), [tg.lo, tg.hi])
        return np.linspace(a, b, tg.points)

    def t_star_value(self) -> float:
        if self.t_star == "median":
            return self.build_signal().median()
        return float(self.t_star)


def load_config(path) -> ScenarioConfig:
    return ScenarioConfig.from_json(path)
