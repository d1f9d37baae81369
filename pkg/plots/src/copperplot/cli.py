"""Command-line entry point: render one chart from one CSV."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render a coppersim CSV artifact as a chart image.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS,
                        help="chart kind")
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="input CSV path")
    parser.add_argument("--out", dest="output_image", required=True,
                        help="output image path (extension selects format)")
    parser.add_argument("--title", default=None, help="optional chart title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        input_csv=args.input_csv,
        kind=args.kind,
        output_image=args.output_image,
        title=args.title,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


def entry():
    sys.exit(main())
