"""plotgen command line: render experiment CSVs to static images."""
from __future__ import annotations

import argparse
import sys

from .render import SCHEMAS, PlotSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotgen",
                                     description="render sqprimes figure datasets")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure CSV to SVG or PNG")
    p.add_argument("--figure", choices=sorted(SCHEMAS), required=True)
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_path", required=True)
    p.add_argument("--format", dest="image_format", choices=("svg", "png"),
                   default="svg")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(figure_id=args.figure, input_csv=args.input_csv,
                        output_path=args.output_path,
                        image_format=args.image_format)
        out = render(spec)
    except RenderError as err:
        print(f"render error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
