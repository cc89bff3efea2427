"""Command line entry point: plots <kind> --runs <dirs...> --out <file>."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, render
from .readers import SchemaError


def build_parser():
    p = argparse.ArgumentParser(
        prog="plots", description="render figures from training run directories"
    )
    p.add_argument("kind", choices=FIGURE_KINDS, help="figure kind")
    p.add_argument("--runs", nargs="+", required=True, help="run directories")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument(
        "--component",
        default="u",
        help="field component for solution grids (default u)",
    )
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            runs=tuple(args.runs), kind=args.kind, out=args.out, component=args.component
        )
        info = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {info['path']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
