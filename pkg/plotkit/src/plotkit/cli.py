"""Thin command-line wrapper: plotkit <kind> --in ... --out ..."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureRequest, render
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render figures from simulator export files"
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in FIGURE_KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--in", dest="inputs", action="append", required=True,
                       help="input export file (repeatable)")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument("--cmap", default="viridis")
        p.add_argument("--clip-nbar", type=float, default=80.0)
        p.add_argument("--thermal-overlay", action="store_true",
                       help="add a thermal overlay (pn_hist)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        req = FigureRequest(
            inputs=args.inputs,
            kind=args.kind,
            out=args.out,
            cmap=args.cmap,
            clip_nbar=args.clip_nbar,
            annotations={"thermal": args.thermal_overlay},
        )
        info = render(req)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = ", ".join(f"{k}={v}" for k, v in info.items() if not hasattr(v, "__len__"))
    print(f"{args.kind} -> {args.out} ({summary})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
