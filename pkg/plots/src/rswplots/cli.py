"""Command line: rswplots <kind> <inputs...> --out figure.png"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, plot


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rswplots",
                                     description="figures from rswlab output files")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("inputs", nargs="+", help="series/study/snapshot files")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--target-slope", type=float, default=None)
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        info = plot(FigureSpec(args.kind, tuple(args.inputs), args.out,
                               args.target_slope, args.title))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    if info.get("annotated_slope") is not None:
        print(f"slope {info['annotated_slope']:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
