"""Command line: `plots <kind> --in FILE [--in FILE2] --out FILE`."""

import argparse
import sys

from . import __version__
from .figures import FIGURE_KINDS, FigureSpec, render
from .reader import InputError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from mrfcrb result CSVs",
    )
    parser.add_argument("--version", action="version", version=f"mrfplots {__version__}")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="FILE", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output figure (.svg or .png)")
    parser.add_argument("--linear-y", action="store_true",
                        help="linear instead of logarithmic y axis")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(inputs=args.inputs, kind=args.kind, output=args.out,
                          logy=not args.linear_y, title=args.title)
        path = render(spec)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
