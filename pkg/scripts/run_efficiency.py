"""Empirical variance of sqrt(n)(theta_hat - theta) at t* against the efficiency bound."""

from _common import out_dir, parser, show

from kdeconv.harness import load_config, run_efficiency_study
from kdeconv.harness.report import emit_report

args = parser("efficiency_flipped_gamma.json", __doc__).parse_args()
sc = load_config(args.config).with_overrides(replications=args.replications)
report = run_efficiency_study(sc, threads=args.threads)
emit_report(report, out_dir(args))
show(report.summary)
