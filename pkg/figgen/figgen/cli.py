"""CLI: figure --in results.csv --out fig.svg --ylabel "..." [--title ...]"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figure")
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--out", dest="output_path", required=True)
    parser.add_argument("--ylabel", default="utility")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv=Path(args.input_csv),
        output_path=Path(args.output_path),
        ylabel=args.ylabel,
        title=args.title,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
