"""Command-line driver: check files and print the inferred global types."""

from __future__ import annotations

import argparse
import sys

from .constraints import ConstraintSet
from .errors import ParseFailure, SizecheckError
from .frontend import check_text, render_global
from .inference import Checker
from .prelude import load_prelude
from .syntax import CheckerState, GlobalEnv, Signature


def build_checker(no_prelude: bool = False, trace=None, dump=None) -> Checker:
    checker = Checker(Signature(), GlobalEnv(), CheckerState(), trace=trace, dump=dump)
    if not no_prelude:
        load_prelude(checker)
    return checker


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sizecheck",
        description="Type checker with size-based termination and productivity checking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="type-check one or more source files")
    check.add_argument("files", nargs="+", metavar="FILE")
    check.add_argument(
        "--dump-constraints", action="store_true",
        help="print each fixpoint's constraint set before the solver runs",
    )
    check.add_argument(
        "--trace", action="store_true", help="print inference rule names as applied"
    )
    check.add_argument(
        "--no-prelude", action="store_true", help="do not load the built-in prelude"
    )
    check.add_argument(
        "--ascii", action="store_true",
        help="render the preserved/infinite size markers as ! and oo",
    )
    args = parser.parse_args(argv)
    return run_check(args)


def run_check(args) -> int:
    trace = (lambda rule: print(f"trace: {rule}", file=sys.stderr)) if args.trace else None
    dump = None
    if args.dump_constraints:

        def dump(name: str, C: ConstraintSet) -> None:
            print(f"constraints {name}:")
            for line in C.dump_lines():
                print(line)

    try:
        checker = build_checker(no_prelude=args.no_prelude, trace=trace, dump=dump)
    except SizecheckError as err:  # pragma: no cover - the prelude is vetted
        print(err.render("<prelude>"), file=sys.stderr)
        return 1

    warn = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    for filename in args.files:
        try:
            with open(filename, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as err:
            print(f"error[E-IO]: {err}", file=sys.stderr)
            return 2
        try:
            check_text(
                checker,
                text,
                warn=warn,
                on_global=lambda g: print(render_global(g, ascii=args.ascii)),
            )
        except ParseFailure as err:
            print(err.render(filename), file=sys.stderr)
            return 2
        except SizecheckError as err:
            print(err.render(filename), file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
