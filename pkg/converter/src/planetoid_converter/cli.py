"""CLI: planetoid-convert convert --dataset cora --src DIR --out DIR"""

from __future__ import annotations

import argparse
import sys

from .convert import convert
from .loader import DATASETS, ConverterError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planetoid-convert",
        description="Convert the binary Planetoid distribution into text bundles.")
    sub = parser.add_subparsers(dest="command", required=True)
    conv = sub.add_parser("convert", help="convert one dataset")
    conv.add_argument("--dataset", required=True, choices=DATASETS)
    conv.add_argument("--src", required=True,
                      help="directory holding the ind.<dataset>.* files")
    conv.add_argument("--out", required=True, help="bundle output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = convert(args.src, args.dataset, args.out)
    except ConverterError as exc:
        print(f"conversion failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.dataset} bundle to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
