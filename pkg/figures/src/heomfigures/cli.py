"""Command-line figure rendering.

Exit codes: 0 success, 3 bad spec or artifact that does not match the
expected sweep layout.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .artifacts import MissingOverlayData, SchemaMismatch
from .figspec import FigureConfigError, load_figure_spec
from .render import render

EXIT_OK = 0
EXIT_CONFIG = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from steady-state sweep CSV + JSON sidecar artifacts.",
    )
    parser.add_argument(
        "--spec", type=Path, required=True, help="TOML figure specification"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_figure_spec(args.spec)
        out = render(spec)
    except (FigureConfigError, SchemaMismatch, MissingOverlayData) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
