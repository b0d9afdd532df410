"""Command-line entry point.

    curvedfd solve --problem example1 --n 128,256,512 --out DIR [--plot] [--csv]
                   [--solver direct|iterative] [--dump-stencils] [--config FILE]
    curvedfd list
"""

from __future__ import annotations

import argparse
import logging
import sys

from .catalog import describe, problem_names
from .config import load_config, parse_sizes
from .harness import run_convergence


def _bool_flag(parser, name, help_text):
    parser.add_argument(f"--{name}", dest=name.replace("-", "_"), action="store_true",
                        default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvedfd",
                                     description="Fourth-order compact FDM on curved domains.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a convergence study")
    s.add_argument("--config", help="INI file with [run] and optional problem sections")
    s.add_argument("--problem", help="catalog name, or 'custom' with --config")
    s.add_argument("--n", type=parse_sizes, help="comma-separated grid sizes N (h = 1/N)")
    s.add_argument("--out", help="output directory")
    s.add_argument("--solver", choices=["auto", "direct", "iterative"])
    _bool_flag(s, "plot", "write an SVG error plot per N")
    _bool_flag(s, "csv", "write the convergence table as CSV")
    _bool_flag(s, "dump-stencils", "write per-center irregular stencil diagnostics")
    _bool_flag(s, "dump-grid", "write node classes as CSV")
    _bool_flag(s, "matrix-market", "export each assembled system")
    s.add_argument("--no-fallback", dest="fallback", action="store_false", default=None,
                   help="fail instead of using low-order rows where no compact stencil exists")

    sub.add_parser("list", help="list catalog problems")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        for name in problem_names():
            print(f"{name:10s} {describe(name)}")
        return 0

    overrides = {k: getattr(args, k) for k in
                 ("problem", "n", "out", "solver", "plot", "csv", "dump_stencils", "dump_grid",
                  "matrix_market", "fallback")}
    try:
        cfg = load_config(args.config, overrides)
        cfg.problem = cfg.resolve_problem()
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = run_convergence(cfg)
    if cfg.table:
        print(report.table())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
