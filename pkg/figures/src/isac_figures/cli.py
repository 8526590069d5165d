"""Command line: plot <kind> <csv> -o <image>; nonzero exit on schema errors."""

from __future__ import annotations

import argparse
import sys

from .plots import SchemaError, plot_beampattern, plot_gain_matrix, plot_tradeoff

KINDS = {
    "gain-matrix": plot_gain_matrix,
    "beampattern": plot_beampattern,
    "tradeoff": plot_tradeoff,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bdris-isac-plot",
        description="Render experiment CSVs into publication-style figures",
    )
    parser.add_argument("kind", choices=sorted(KINDS), help="which CSV schema to render")
    parser.add_argument("csv", help="input CSV produced by the experiment CLI")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = KINDS[args.kind](args.csv, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(result.path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
