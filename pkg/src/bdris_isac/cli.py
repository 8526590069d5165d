"""Command-line front end for the experiment runners.

Subcommands mirror the emitted artifacts: gain-matrix, beampattern and
tradeoff write CSVs, solve writes a full JSON report. Flags override the
config file; unknown config keys and out-of-range values exit nonzero
with the offending field named.
"""

from __future__ import annotations

import argparse
import sys

from .config import ParseError, ValidationError, load_config
from .experiments import (
    run_beampattern_experiment,
    run_gain_matrix_experiment,
    run_single_solve,
    run_tradeoff_experiment,
)

RUNNERS = {
    "gain-matrix": run_gain_matrix_experiment,
    "beampattern": run_beampattern_experiment,
    "tradeoff": run_tradeoff_experiment,
    "solve": run_single_solve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdris-isac",
        description="BD-RIS-aided ISAC beamforming experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("gain-matrix", "beam-gain matrix per weighting factor"),
        ("beampattern", "azimuth beam sweep per weighting factor"),
        ("tradeoff", "rate vs sensing-gain frontier per architecture"),
        ("solve", "single scenario solve, full JSON report"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--seed", type=int, help="base RNG seed")
        p.add_argument(
            "--eta",
            type=float,
            action="append",
            help="weighting factor(s); repeat for a sweep list",
        )
        p.add_argument(
            "--arch",
            choices=("fbd", "gbd", "dris"),
            action="append",
            help="architecture(s); repeat to compare in tradeoff",
        )
        p.add_argument("--group-size", type=int, help="block size for gbd")
        p.add_argument("--trials", type=int, help="channel draws per tradeoff point")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel tradeoff workers")
    return parser


def _overrides(command: str, args: argparse.Namespace) -> dict:
    over: dict = {
        "seed": args.seed,
        "group_size": args.group_size,
        "num_trials": args.trials,
        "out_dir": args.out,
        "workers": args.workers,
    }
    if args.eta:
        if command in ("gain-matrix", "beampattern"):
            over["eta_list"] = args.eta
        else:
            over["eta"] = args.eta[0]
    if args.arch:
        if command == "tradeoff":
            over["architectures"] = args.arch
        else:
            over["architecture"] = args.arch[0]
    return over


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args.command, args))
        path = RUNNERS[args.command](cfg)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
