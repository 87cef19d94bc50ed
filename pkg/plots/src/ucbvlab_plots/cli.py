"""Command line interface.

One subcommand: render, which turns an experiment CSV into an image.
Exit codes: 0 success, 1 configuration error (bad arguments, missing
file, schema mismatch, empty data), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, render


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="ucbvlab-plots", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    p_render = sub.add_parser("render", help="render one experiment CSV to an image")
    p_render.add_argument("csv", help="experiment CSV produced by the simulation CLI")
    p_render.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    p_render.add_argument("--out", required=True, help="output image path")
    p_render.set_defaults(func=_cmd_render)
    return parser


def _cmd_render(args) -> int:
    out = render(args.csv, args.kind, args.out)
    print(out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"ucbvlab-plots: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        # schema, data, and file problems are configuration errors
        print(f"ucbvlab-plots: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"ucbvlab-plots: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
