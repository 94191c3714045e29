"""Command line entry point.

Usage: khull <experiment> --config path.json [--seed N] [--out dir]

The config file carries the body grammar and the campaign knobs; the
seed and output directory can be overridden on the command line. The
summary is printed as JSON; artifacts (CSV rows, summary JSON, geometry
dumps) are written when an output directory is set. Exit codes: 0 on
success, 2 on configuration errors, 3 on numeric failures.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, NumericError
from .experiments import EXPERIMENTS, load_config, run_experiment

_HELP = {
    "sample-hull": "draw one-or-more samples and record hull f-vectors "
                   "(first replicate's boundary geometry is dumped with --out)",
    "fvector-mc": "Monte Carlo campaign over family f-vectors of uniform samples",
    "zerocell-mc": "Monte Carlo campaign over zero cells of the hyperplane process",
    "expected-facets": "evaluate the expected zero-cell vertex count by "
                       "quadrature/closed form",
    "convergence": "scaled intersection-body statistics against the zero-cell limit",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="khull",
        description="Stochastic geometry experiments over convex-body hulls "
                    "and Poisson hyperplane zero cells.")
    sub = parser.add_subparsers(dest="experiment", required=True,
                                metavar="experiment")
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=_HELP[name])
        cmd.add_argument("--config", required=True,
                         help="JSON config with the body grammar and knobs")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the master seed")
        cmd.add_argument("--out", default=None,
                         help="directory for CSV/JSON/geometry artifacts")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, experiment=args.experiment,
                          seed=args.seed, out=args.out)
        summary = run_experiment(cfg)
    except ConfigError as exc:
        print(f"khull: config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"khull: numeric failure: {exc}\n"
              "khull: rerun with a larger budget (replicates, resolution) or a "
              "different seed; degenerate inputs are reported, not papered over",
              file=sys.stderr)
        return 3
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
