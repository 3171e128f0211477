"""``lpsmooth`` command line.

Exit status: 0 when every criterion passes, 1 when one fails, 2 on a
configuration or cover error.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import LPError
from .config import EXPERIMENTS, build_config, load_config, parse_params
from .emit import emit
from .experiments import run

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="JSON config file")
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    p.add_argument("--n", type=int, help="samples per period")
    p.add_argument("--period", type=float, help="period T of the grid")
    p.add_argument("--intervals", metavar="PATH", help='JSON list of {"a": .., "b": ..}')
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    p.add_argument("--trials", type=int, help="number of random trials")
    p.add_argument("--params", metavar="i=INT,r=INT,s=FLOAT",
                   help="parameters; also accepts p, nu, sigma_max")
    p.add_argument("--A", type=float, help="geometric ratio of the scale partition")
    p.add_argument("--D", type=int, help="number of residue classes")
    p.add_argument("--workers", type=int, help="threads for independent trials")
    p.add_argument("--quiet", action="store_true", help="no criterion summary on stderr")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpsmooth",
        description="Numerical experiments on smoothed Littlewood-Paley projections.")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    shared = _shared()
    helps = {
        "decomp-check": "exactness of the decomposition identity",
        "bound-scan": "Campanato norm ratios of S1, S2, H and R Phi g under refinement",
        "counterexample": "sharp analytic cut against the smoothed projection",
        "rf-inequality": "square-function inequalities for arbitrary intervals",
        "shift-lip": "Lipschitz bound for modulated convolutions",
        "kernel-decay": "Taylor-corrected kernel decay exponents",
        "dump-profile": "sample a multiplier profile",
    }
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, parents=[shared], help=helps[name])
        if name == "decomp-check":
            sp.add_argument("--max-intervals", type=int, dest="max_intervals",
                            help="draw a random family with at most this many intervals per trial")
        if name == "kernel-decay":
            sp.add_argument("--kernel", choices=("smooth1", "smooth2", "smooth3"))
        if name == "dump-profile":
            sp.add_argument("--profile",
                            help="phi, psi_tilde, psi1, psi2, theta or shift_bump")
    return parser


def config_from_args(args):
    file_data = load_config(args.config) if args.config else None
    overrides = {
        "seed": args.seed, "n": args.n, "period": args.period, "trials": args.trials,
        "out": args.out, "format": args.format, "workers": args.workers,
        "intervals": args.intervals, "A": args.A, "D": args.D,
        "params": parse_params(args.params) if args.params else None,
    }
    for extra in ("max_intervals", "kernel", "profile"):
        overrides[extra] = getattr(args, extra, None)
    return build_config(args.experiment, file_data, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = run(config)
        text = emit(report, config.format, config.out)
    except LPError as exc:
        print(f"lpsmooth {args.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config.out is None:
        sys.stdout.write(text)
    if not args.quiet:
        for name, ok in report.criteria.items():
            print(f"{'PASS' if ok else 'FAIL'}  {name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
