"""Replication engine for Monte Carlo studies.

Every replication draws its randomness from ``SeedSequence([seed, rep, ...])``
so results do not depend on scheduling; parallel and sequential runs return
identical rows.  Workers receive the config as a plain dict and rebuild their
components once per process.
"""

from __future__ import annotations

import json
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy

from ..error_models import ErrorModel
from ..estimator import (
    EstimateCurve,
    Sample,
    density_estimate,
    estimate_functional,
    estimation_grid,
    rho_condition,
)
from ..exceptions import AdmissibilityWarning
from ..grid import Grid
from ..kernels import build_flat_top
from ..limit_process import (
    BandResult,
    CovarianceEstimate,
    confidence_band,
    covariance_plugin,
    efficiency_bound,
    influence_function,
    simulate_sup_quantile,
)
from ..oracles import Scenario, analytic_truth, observation_density
from .config import ScenarioConfig

__all__ = [
    "StudyReport",
    "generate_sample",
    "estimate_once",
    "band_once",
    "run_coverage_study",
    "run_rate_study",
    "run_efficiency_study",
    "run_bias_study",
    "summarize",
]


@dataclass
class StudyReport:
    """Rows of a study plus summaries recomputable from them."""

    kind: str
    columns: list
    rows: list
    summary: dict
    meta: dict = field(default_factory=dict)
    curve: list | None = None


# ---------------------------------------------------------------------------
# sampling


def _streams(seed: int, *key: int, count: int = 2):
    ss = np.random.SeedSequence([int(seed), *map(int, key)])
    return [np.random.default_rng(s) for s in ss.spawn(count)]


def generate_sample(sc: ScenarioConfig, rep: int, n: int | None = None) -> Sample:
    """``Y = X + eps`` with independent streams for ``X`` and ``eps`` keyed by ``(seed, rep)``."""
    n = int(sc.n if n is None else n)
    key = (rep,) if n == sc.n else (rep, n)
    rx, re = _streams(sc.seed, *key)
    x = sc.build_signal().sample(rx, n)
    e = sc.build_error().sample(re, n)
    return Sample(x + e)


# ---------------------------------------------------------------------------
# per-process context


@dataclass(frozen=True)
class _Context:
    sc: ScenarioConfig
    em: ErrorModel
    scenario: Scenario
    kernel: object


def _influence_grid(sc: ScenarioConfig, em: ErrorModel) -> Grid:
    sig = sc.build_signal()
    slo, shi = sig.support(1e-12)
    ylo = slo + min(0.0, em.mean - 30.0 * em.sd)
    yhi = shi + max(0.0, em.mean + 30.0 * em.sd)
    f = sc.build_functional()
    span = (yhi - ylo) + f.support_radius + 2.0
    return Grid(-span, span, 2**13)


@lru_cache(maxsize=4)
def _context(cfg_json: str) -> _Context:
    sc = ScenarioConfig.from_dict(json.loads(cfg_json))
    em = sc.build_error()
    f = sc.build_functional()
    scen = Scenario(sc.build_signal(), em, f)
    k = build_flat_top(sc.kernel.get("flat_radius", 0.5))
    return _Context(sc, em, scen, k)


@lru_cache(maxsize=4)
def _influence(cfg_json: str):
    ctx = _context(cfg_json)
    return influence_function(ctx.scenario.functional, ctx.em, _influence_grid(ctx.sc, ctx.em))


def _key(sc: ScenarioConfig) -> str:
    return json.dumps(sc.to_dict(), sort_keys=True)


def estimate_once(sc: ScenarioConfig, s: Sample, t=None, h: float | None = None) -> EstimateCurve:
    """Route-A estimate for one sample."""
    ctx = _context(_key(sc))
    h = sc.bandwidth_for(s.n) if h is None else h
    t = sc.t_values(s.y) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    grid = estimation_grid(s.y, ctx.em, ctx.scenario.functional, h, sc.grid_m, t)
    d = density_estimate(s, ctx.em, ctx.kernel, h, grid)
    return estimate_functional(d, ctx.scenario.functional, t)


def band_once(
    sc: ScenarioConfig, s: Sample, rng=None, alpha: float | None = None
) -> tuple[EstimateCurve, CovarianceEstimate, BandResult]:
    """Estimate, plug-in covariance, sup-quantile and band for one sample."""
    key = _key(sc)
    curve = estimate_once(sc, s)
    inf = _influence(key)
    cov = covariance_plugin(inf, s, curve)
    band = simulate_sup_quantile(cov, sc.alpha if alpha is None else alpha, sc.sup_reps, rng)
    se = np.sqrt(np.maximum(np.diag(cov.sigma), 0.0) / s.n)
    return confidence_band(curve.with_se(se), band), cov, band


# ---------------------------------------------------------------------------
# workers (module level so they pickle)


def _coverage_rep(args):
    key, rep, alphas = args
    ctx = _context(key)
    sc = ctx.sc
    s = generate_sample(sc, rep)
    # one simulation stream shared by all levels keeps coverage monotone in alpha
    sim_seed = np.random.SeedSequence([int(sc.seed), int(rep), 99])
    curve = estimate_once(sc, s)
    inf = _influence(key)
    cov = covariance_plugin(inf, s, curve)
    truth = analytic_truth(ctx.scenario, curve.t)
    rows = []
    for a in alphas:
        band = simulate_sup_quantile(cov, a, sc.sup_reps, sim_seed)
        hw = band.band_halfwidth
        covered = bool(np.all(np.abs(curve.theta_hat - truth) <= hw))
        for ti, th, tr in zip(curve.t, curve.theta_hat, truth):
            rows.append([rep, a, float(ti), float(th), float(th - hw), float(th + hw), float(tr), covered])
    return rows


def _point_rep(args):
    key, rep, n, h = args
    ctx = _context(key)
    sc = ctx.sc
    s = generate_sample(sc, rep, n)
    t = sc.t_star_value()
    th = float(estimate_once(sc, s, [t], h).theta_hat[0])
    truth = float(analytic_truth(ctx.scenario, t))
    return [rep, n, h, t, th, truth]


def _map(fn, tasks, threads: int):
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    return [fn(t) for t in tasks]


def _meta(sc: ScenarioConfig, started: float, **extra) -> dict:
    return {
        "config": sc.to_dict(),
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "timing_s": round(time.perf_counter() - started, 3),
        **extra,
    }


# ---------------------------------------------------------------------------
# summaries


def summarize(kind: str, rows: list) -> dict:
    """Recompute the summary of a study from its rows."""
    if kind == "coverage":
        by_alpha: dict = {}
        for rep, a, *_, covered in rows:
            by_alpha.setdefault(float(a), {})[int(rep)] = bool(covered)
        out = {}
        for a, reps in sorted(by_alpha.items()):
            p = float(np.mean(list(reps.values())))
            r = len(reps)
            out[f"{a:g}"] = {"coverage": p, "se": float(np.sqrt(p * (1 - p) / r)), "replications": r}
        halfwidths = [(r[5] - r[4]) / 2 for r in rows]
        return {"levels": out, "mean_halfwidth": float(np.mean(halfwidths)) if rows else None}
    if kind in ("rate", "efficiency", "bias"):
        groups: dict = {}
        for rep, n, h, t, th, truth, *rest in rows:
            groups.setdefault((int(n), float(h)), []).append((th, truth, *rest))
        per = []
        for (n, h), vals in sorted(groups.items()):
            th = np.array([v[0] for v in vals])
            tr = np.array([v[1] for v in vals])
            err = th - tr
            item = {
                "n": n,
                "h": h,
                "replications": len(vals),
                "rmse": float(np.sqrt(np.mean(err**2))),
                "bias": float(np.mean(err)),
                "bias_se": float(np.std(err, ddof=1) / np.sqrt(len(err))) if len(err) > 1 else None,
                "sd_sqrt_n": float(np.std(np.sqrt(n) * err, ddof=1)) if len(err) > 1 else None,
            }
            if kind == "efficiency":
                bound = float(vals[0][2])
                var = float(np.var(np.sqrt(n) * err, ddof=1)) if len(err) > 1 else float("nan")
                item.update({"empirical_variance": var, "bound": bound, "ratio": var / bound if bound else None})
            per.append(item)
        out = {"groups": per}
        if kind == "rate" and len(per) >= 2:
            ln = np.log([g["n"] for g in per])
            lr = np.log([g["rmse"] for g in per])
            out["slope"] = float(np.polyfit(ln, lr, 1)[0])
        if kind == "bias" and len(per) >= 2:
            ordered = sorted(per, key=lambda g: -g["h"])
            out["log2_ratios"] = [
                float(np.log2(abs(a["bias"]) / abs(b["bias"]))) if b["bias"] else None
                for a, b in zip(ordered[:-1], ordered[1:])
            ]
        return out
    raise ValueError(f"unknown study kind {kind!r}")


# ---------------------------------------------------------------------------
# studies


def run_coverage_study(sc: ScenarioConfig, threads: int = 1, alphas=None) -> StudyReport:
    """Simultaneous coverage of the plug-in band over the t-grid.

    A replication is covered when the truth lies inside the band at every
    grid point.  Extra ``alphas`` reuse the same samples and estimates.
    """
    started = time.perf_counter()
    key = _key(sc)
    alphas = tuple(alphas) if alphas else (sc.alpha,)
    tasks = [(key, rep, alphas) for rep in range(sc.replications)]
    rows = [r for chunk in _map(_coverage_rep, tasks, threads) for r in chunk]
    cols = ["rep", "alpha", "t", "theta_hat", "lo", "hi", "truth", "covered"]
    first = [r for r in rows if r[0] == 0 and r[1] == alphas[0]]
    curve = [[r[2], r[3], r[4], r[5], r[6]] for r in first]
    h = sc.bandwidth_for(sc.n)
    ok, rho = rho_condition(sc.n, h, sc.indices()["beta"], sc.indices()["gamma_s"])
    meta = _meta(sc, started, h=h, rho_condition={"rho": rho, "satisfied": ok},
                 note="coverage uses the finite t-grid in place of the whole line")
    return StudyReport("coverage", cols, rows, summarize("coverage", rows), meta, curve)


def run_rate_study(sc: ScenarioConfig, n_list=None, threads: int = 1) -> StudyReport:
    """RMSE of ``theta_hat`` at ``t*`` for each ``n`` and the log-log slope."""
    started = time.perf_counter()
    key = _key(sc)
    n_list = tuple(n_list or sc.n_list)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdmissibilityWarning)
        hs = {n: sc.bandwidth_for(n) for n in n_list}
    tasks = [(key, rep, n, hs[n]) for n in n_list for rep in range(sc.replications)]
    rows = _map(_point_rep, tasks, threads)
    cols = ["rep", "n", "h", "t", "theta_hat", "truth"]
    summary = summarize("rate", rows)
    meta = _meta(sc, started)
    if summary.get("slope", -0.5) > -0.4:
        meta["diagnostic"] = "slope above -0.4: slower than sqrt(n)"
    return StudyReport("rate", cols, rows, summary, meta)


def run_bias_study(sc: ScenarioConfig, h_list, threads: int = 1) -> StudyReport:
    """Mean error of ``theta_hat`` at ``t*`` for each bandwidth, on common samples."""
    started = time.perf_counter()
    key = _key(sc)
    tasks = [(key, rep, sc.n, float(h)) for h in h_list for rep in range(sc.replications)]
    rows = _map(_point_rep, tasks, threads)
    cols = ["rep", "n", "h", "t", "theta_hat", "truth"]
    return StudyReport("bias", cols, rows, summarize("bias", rows), _meta(sc, started))


def population_bound(sc: ScenarioConfig, t: float | None = None) -> tuple[float, float]:
    """``(bound, theta)`` at ``t`` (default ``t*``) with ``f_Y`` from the spectral product."""
    ctx = _context(_key(sc))
    t = sc.t_star_value() if t is None else float(t)
    fy = observation_density(ctx.scenario.signal, ctx.em)
    theta = float(analytic_truth(ctx.scenario, t))
    span = max(abs(fy.grid.lo - t), abs(fy.grid.hi - t)) + 1.0
    inf = influence_function(ctx.scenario.functional, ctx.em, Grid(-span, span, 2**14))
    return efficiency_bound(ctx.scenario.functional, ctx.em, fy, theta, t, inf), theta


def run_efficiency_study(sc: ScenarioConfig, threads: int = 1) -> StudyReport:
    """Empirical variance of ``sqrt(n)(theta_hat - theta)`` at ``t*`` against the bound."""
    started = time.perf_counter()
    key = _key(sc)
    bound, _ = population_bound(sc)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdmissibilityWarning)
        h = sc.bandwidth_for(sc.n)
    tasks = [(key, rep, sc.n, h) for rep in range(sc.replications)]
    rows = [r + [bound] for r in _map(_point_rep, tasks, threads)]
    cols = ["rep", "n", "h", "t", "theta_hat", "truth", "bound"]
    return StudyReport("efficiency", cols, rows, summarize("efficiency", rows), _meta(sc, started))
