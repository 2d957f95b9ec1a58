"""Batch front end: one scenario per invocation, structured text out.

Exit codes: 0 for completed runs (a nonzero obstruction is a result, not
a failure), 2 for parse or validation problems, 3 for bounds or time
violations, 4 for internal faults.
"""

from __future__ import annotations

import argparse
import sys

from .oracle import BoundsExceeded
from .rings import TowerError
from .scenario import ParseError, TASKS, ValidationError, parse_scenario, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BOUNDS = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftcalc",
        description="obstruction calculus for lifting chain maps along "
                    "small extensions of finite local rings",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sp = sub.add_parser(task, help=f"run a scenario as task {task!r}")
        sp.add_argument("scenario", nargs="?", default="-",
                        help="scenario file path, or - for standard input")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--max-candidates", type=int, default=None)
        sp.add_argument("--time-budget", type=float, default=None)
        sp.add_argument("--out", default=None,
                        help="write the report here instead of standard output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.scenario == "-":
            text = sys.stdin.read()
        else:
            with open(args.scenario, "r", encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"liftcalc: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        sc = parse_scenario(text, task_override=args.task)
        if args.seed is not None:
            sc.seed = args.seed
        if args.max_candidates is not None:
            sc.max_candidates = args.max_candidates
        if args.time_budget is not None:
            sc.time_budget = args.time_budget
        if args.out is not None:
            sc.out = args.out
        report = run(sc)
    except (ParseError, ValidationError, TowerError) as exc:
        print(f"liftcalc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundsExceeded as exc:
        print(f"liftcalc: bounds: {exc}", file=sys.stderr)
        return EXIT_BOUNDS
    except Exception as exc:  # invariant failures are faults, not results
        print(f"liftcalc: internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if sc.out:
        with open(sc.out, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
