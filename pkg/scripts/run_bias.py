"""Mean error at t* for a bandwidth h and h/2, and the log2 ratio of the two biases."""

from _common import out_dir, parser, show

from kdeconv.harness import load_config, run_bias_study
from kdeconv.harness.report import emit_report

p = parser("bias_gaussian_laplace.json", __doc__)
p.add_argument("--h", type=float, nargs="+", default=None, help="bandwidths (default: config h and h/2)")
args = p.parse_args()
sc = load_config(args.config).with_overrides(replications=args.replications)
h_list = args.h or [sc.bandwidth.h, sc.bandwidth.h / 2]
report = run_bias_study(sc, h_list, threads=args.threads)
emit_report(report, out_dir(args))
show(report.summary)
