"""CLI: ``coordplot plot <spec-file> [<spec-file> ...]``."""

from __future__ import annotations

import argparse
import sys

from . import specfile
from .data import parse_spec
from .render import render
from .specfile import SpecError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="coordplot", description="Render experiment CSV figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p_plot = sub.add_parser("plot", help="render one or more plot spec files")
    p_plot.add_argument("specs", nargs="+")
    args = parser.parse_args(argv)
    try:
        for path in args.specs:
            sections = specfile.load(path)
            spec = parse_spec(sections, source=path)
            render(spec)
            print(spec.output)
        return 0
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
