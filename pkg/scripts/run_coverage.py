"""Simultaneous coverage of the plug-in band (default: 500 replications, n = 4000)."""

from _common import out_dir, parser, show

from kdeconv.harness import load_config, run_coverage_study
from kdeconv.harness.report import emit_report

args = parser("coverage_indicator.json", __doc__).parse_args()
sc = load_config(args.config).with_overrides(replications=args.replications)
report = run_coverage_study(sc, threads=args.threads, alphas=[sc.alpha, 0.10, 0.5])
emit_report(report, out_dir(args))
show(report.summary)
