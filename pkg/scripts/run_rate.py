"""RMSE of the distribution-function estimate at the signal median for n in n_list."""

from _common import out_dir, parser, show

from kdeconv.harness import load_config, run_rate_study
from kdeconv.harness.report import emit_report

args = parser("rate_indicator.json", __doc__).parse_args()
sc = load_config(args.config).with_overrides(replications=args.replications)
report = run_rate_study(sc, threads=args.threads)
emit_report(report, out_dir(args))
show(report.summary)
