"""Command line entry point.

Verbs: ``simulate``, ``estimate``, ``band``, ``coverage``, ``rate``,
``efficiency`` and ``selftest``.  Exit codes: 0 on success, 2 on invalid
input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from ..estimator import Sample
from ..exceptions import AdmissibilityWarning, ConfigError, NumericalError, ValidationError
from ..oracles import analytic_truth
from .config import ScenarioConfig
from .report import CURVE_COLUMNS, emit_report, write_json
from .study import (
    _context,
    _key,
    band_once,
    estimate_once,
    generate_sample,
    run_coverage_study,
    run_efficiency_study,
    run_rate_study,
)

log = logging.getLogger("kdeconv")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _load(args) -> ScenarioConfig:
    if not args.config:
        raise ConfigError("--config is required")
    sc = ScenarioConfig.from_json(args.config)
    return sc.with_overrides(seed=args.seed)


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _read_sample(path) -> Sample:
    vals = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                if vals:
                    raise ConfigError(f"{path}: non-numeric value {row[0]!r}") from None
    return Sample(np.array(vals))


def _sample_for(args, sc: ScenarioConfig) -> tuple[Sample, bool]:
    if getattr(args, "data", None):
        return _read_sample(args.data), False
    return generate_sample(sc, args.rep), True


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else repr(float(v)) for v in r])


def cmd_simulate(args) -> int:
    sc = _load(args)
    s = generate_sample(sc, args.rep)
    out = _out(args)
    _write_csv(out / "sample.csv", ["y"], [[v] for v in s.y])
    write_json(out / "summary.json", {"n": s.n, "mean": s.y.mean(), "sd": s.y.std(ddof=1), "rep": args.rep,
                                      "config": sc.to_dict()})
    return EXIT_OK


def cmd_estimate(args) -> int:
    sc = _load(args)
    s, _ = _sample_for(args, sc)
    curve, cov, _ = band_once(sc, s)
    curve = curve.with_band(None, None)
    out = _out(args)
    curve.to_csv(out / "curve.csv")
    write_json(out / "summary.json", {"n": s.n, "h": curve.h, "points": len(curve), "config": sc.to_dict()})
    return EXIT_OK


def cmd_band(args) -> int:
    sc = _load(args)
    s, simulated = _sample_for(args, sc)
    rng = np.random.SeedSequence([sc.seed, args.rep, 99])
    curve, cov, band = band_once(sc, s, rng)
    out = _out(args)
    curve.to_csv(out / "curve.csv")
    truth = analytic_truth(_context(_key(sc)).scenario, curve.t) if simulated else [None] * len(curve)
    _write_csv(out / "plot.csv", CURVE_COLUMNS,
               [[t, th, lo, hi, tr] for t, th, lo, hi, tr in zip(curve.t, curve.theta_hat, curve.lo, curve.hi, truth)])
    (out / "band.json").write_text(band.to_json() + "\n", encoding="utf-8")
    (out / "covariance.json").write_text(cov.to_json() + "\n", encoding="utf-8")
    if args.sigma_csv:
        cov.sigma_to_csv(out / "sigma.csv")
    write_json(out / "summary.json", {"n": s.n, "h": curve.h, "q": band.q, "alpha": band.alpha,
                                      "band_halfwidth": band.band_halfwidth, "config": sc.to_dict()})
    return EXIT_OK


def cmd_coverage(args) -> int:
    sc = _load(args)
    alphas = [sc.alpha, *(args.extra_alpha or [])]
    r = run_coverage_study(sc, threads=args.threads, alphas=alphas)
    emit_report(r, _out(args), timing=not args.no_timing)
    print(_one_line(r))
    return EXIT_OK


def cmd_rate(args) -> int:
    sc = _load(args)
    r = run_rate_study(sc, threads=args.threads)
    emit_report(r, _out(args), timing=not args.no_timing)
    print(_one_line(r))
    return EXIT_OK


def cmd_efficiency(args) -> int:
    sc = _load(args)
    r = run_efficiency_study(sc, threads=args.threads)
    emit_report(r, _out(args), timing=not args.no_timing)
    print(_one_line(r))
    return EXIT_OK


def _one_line(r) -> str:
    s = r.summary
    if r.kind == "coverage":
        return " ".join(f"alpha={a} coverage={v['coverage']:.3f}+-{v['se']:.3f}" for a, v in s["levels"].items())
    if r.kind == "rate":
        return f"slope={s.get('slope', float('nan')):.3f}"
    g = s["groups"][0]
    return f"empirical_variance={g['empirical_variance']:.4g} bound={g['bound']:.4g} ratio={g['ratio']}"


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed or 0)
    ok = all(r["passed"] for r in results)
    for r in results:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}: {r['detail']}")
    if args.out:
        write_json(_out(args) / "summary.json", {"passed": ok, "checks": results})
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kdeconv", description="Deconvolution estimates of linear functionals.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, study=False):
        sp.add_argument("--config", help="scenario JSON file")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="worker processes")
        if study:
            sp.add_argument("--no-timing", action="store_true", help="omit wall-clock time from summary.json")
        else:
            sp.add_argument("--rep", type=int, default=0, help="replication index for simulated data")

    sp = sub.add_parser("simulate", help="draw one sample Y = X + eps")
    common(sp)
    sp.set_defaults(fn=cmd_simulate)
    for name, fn, help_ in (("estimate", cmd_estimate, "estimate theta_t with plug-in standard errors"),
                            ("band", cmd_band, "estimate with a uniform confidence band")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--data", help="one-column CSV of observations (default: simulate)")
        if name == "band":
            sp.add_argument("--sigma-csv", action="store_true", help="also write the covariance matrix as CSV")
        sp.set_defaults(fn=fn)
    sp = sub.add_parser("coverage", help="simultaneous coverage study")
    common(sp, study=True)
    sp.add_argument("--extra-alpha", type=float, action="append", help="additional level on the same samples")
    sp.set_defaults(fn=cmd_coverage)
    sp = sub.add_parser("rate", help="RMSE against n")
    common(sp, study=True)
    sp.set_defaults(fn=cmd_rate)
    sp = sub.add_parser("efficiency", help="empirical variance against the efficiency bound")
    common(sp, study=True)
    sp.set_defaults(fn=cmd_efficiency)
    sp = sub.add_parser("selftest", help="adjoint-identity and oracle checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", AdmissibilityWarning)
    started = time.perf_counter()
    try:
        code = args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("%s finished in %.2fs", args.verb, time.perf_counter() - started)
    return code


if __name__ == "__main__":
    sys.exit(main())
