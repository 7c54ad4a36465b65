"""Batch command-line interface.

Commands operate on one entry file; imports are resolved relative to it.
Exit codes: 0 success, 1 any checking diagnostic, 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .env import Environment, Options
from .errors import HottError
from .levels import Constraint, LT
from .loader import load_file
from .prelude import bootstrap
from .printer import Printer, print_level
from .reduce import normalize
from .terms import Const


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"usage error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="hottc", description="batch proof checker")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file")
        sp.add_argument("--type-in-type", action="store_true",
                        help="collapse the universe hierarchy")
        sp.add_argument("--instance-depth", type=int, default=16,
                        metavar="N", help="instance search depth limit")
        sp.add_argument("--no-cache", action="store_true",
                        help="re-check imports instead of using their caches")

    common(sub.add_parser("check", help="check a file and its imports"))
    sp = sub.add_parser("report-axioms",
                        help="list axiom dependencies per definition")
    common(sp)
    sp.add_argument("name", nargs="?", default=None)
    sp = sub.add_parser("normalize", help="print a normal form")
    common(sp)
    sp.add_argument("name")
    common(sub.add_parser("print-universes",
                          help="list the final universe constraints"))
    return p


def _load(args) -> tuple:
    opts = Options(type_in_type=args.type_in_type,
                   instance_depth=args.instance_depth)
    env = bootstrap(opts)
    names = load_file(env, args.file, use_cache=not args.no_cache)
    return env, names


def _axiom_line(env: Environment, name: str) -> str:
    axs = sorted(env.axioms_of(name))
    return f"{name}: " + (" ".join(axs) if axs else "<none>")


def _self_const(env: Environment, name: str) -> Const:
    d = env.lookup(name)
    return Const(name, tuple(d.level_params))


def run_cli(argv: Optional[List[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        env, names = _load(args)
        if args.command == "check":
            return 0
        if args.command == "report-axioms":
            targets = [args.name] if args.name else names
            for n in targets:
                env.lookup(n)  # unknown names are diagnostics
                print(_axiom_line(env, n))
            return 0
        if args.command == "normalize":
            d = env.lookup(args.name)
            nf = normalize(env, _self_const(env, args.name))
            pr = Printer(env)
            print(pr.term(nf))
            return 0
        if args.command == "print-universes":
            for c in env.graph.constraints:
                rel = "<" if c.rel == LT else c.rel
                print(f"{print_level(c.lhs)} {rel} {print_level(c.rhs)}")
            return 0
    except HottError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except RecursionError:
        sys.stderr.write("error: checker recursion limit exceeded\n")
        return 1
    return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
