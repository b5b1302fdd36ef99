"""Command-line driver: one subcommand per experiment kind.

Without --config the small default scenario is used.  All output files go
to --out; progress goes to stderr; exit status is 0 on success and 2 on
validation or I/O errors.
"""

import argparse
import sys

from .harness import EXPERIMENTS, run_experiment
from .scenario import SystemConfig

_GRID_KINDS = [k for k, v in EXPERIMENTS.items() if v is not None]


def _onoff(value):
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected 'on' or 'off', got {value!r}")
    return value == "on"


def _grid(value):
    try:
        return [float(tok) for tok in value.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fdsec",
        description="Monte Carlo experiments for robust secure full-duplex "
                    "resource allocation.")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="EXPERIMENT")
    for kind in EXPERIMENTS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", metavar="PATH",
                       help="scenario config file (key = value lines); "
                            "default is the built-in small scenario")
        p.add_argument("--trials", type=int, default=50, metavar="N")
        p.add_argument("--seed", type=int, default=0, metavar="N")
        p.add_argument("--baseline", type=_onoff, default=False, metavar="on|off",
                       help="also solve the fixed-direction comparison scheme")
        p.add_argument("--verify", type=_onoff, default=False, metavar="on|off",
                       help="run the adversarial sampling check on every solution")
        p.add_argument("--timing", type=_onoff, default=False, metavar="on|off",
                       help="record wall-clock solve times (breaks byte determinism)")
        p.add_argument("--out", default="./results", metavar="DIR")
        if kind == "tradeoff":
            p.add_argument("--lambda-step", type=float, default=0.01, metavar="X",
                           dest="lambda_step")
        else:
            p.add_argument("--lambda1", type=float, default=0.1, metavar="X",
                           help="scalarization weight for the single reported point")
            p.add_argument("--grid", type=_grid, metavar="V1,V2,...",
                           help="override the swept grid values")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = SystemConfig.from_file(args.config) if args.config else None
        kwargs = dict(config=config, trials=args.trials, seed=args.seed,
                      out_dir=args.out, baseline=args.baseline,
                      verify=args.verify, timing=args.timing)
        if args.kind == "tradeoff":
            kwargs["lambda_step"] = args.lambda_step
        else:
            kwargs["lambda1"] = args.lambda1
            kwargs["grid"] = args.grid
        result = run_experiment(args.kind, **kwargs)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result['summary_path']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
