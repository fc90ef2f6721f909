"""Command line front end for the harness.

Two subcommands: ``run`` sweeps seeded equivalence cases and exits nonzero if
any verdict is divergent; ``time`` measures original-vs-rewritten wall time
for each rule's representative cell at desk scale.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys

from . import harness
from .engine import DEFAULT_ENGINE, EngineError


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--rules",
        default=",".join(harness.RULE_IDS),
        help="comma-separated rule ids (default: all six)",
    )
    parser.add_argument(
        "--report",
        choices=("json", "none"),
        default="json",
        help="write a JSON report to stdout, or nothing",
    )
    parser.add_argument(
        "--engine",
        default=None,
        help="engine command to run (default: this interpreter's cellrw module)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellrw-harness",
        description="equivalence and timing checks for the cellrw rewrite rules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="equivalence sweep across seeded random inputs")
    run.add_argument("--seeds", type=int, default=100, help="seeds per case family")
    run.add_argument("--rows", type=int, default=250, help="rows per generated frame")
    _add_common(run)

    tm = sub.add_parser("time", help="original-vs-rewritten timing at desk scale")
    tm.add_argument("--rows", type=int, default=1_000_000, help="rows per generated frame")
    tm.add_argument("--trials", type=int, default=10, help="trials per side; the median counts")
    _add_common(tm)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rules = tuple(dict.fromkeys(r for r in args.rules.split(",") if r))
    unknown = [r for r in rules if r not in harness.RULE_IDS]
    if unknown:
        print(f"cellrw-harness: unknown rules: {', '.join(unknown)}", file=sys.stderr)
        return 2
    engine = tuple(shlex.split(args.engine)) if args.engine else DEFAULT_ENGINE
    try:
        if args.command == "run":
            report = harness.run_sweep(rules, seeds=args.seeds, rows=args.rows, engine=engine)
        else:
            report = harness.run_timings(rules, rows=args.rows, trials=args.trials, engine=engine)
    except (EngineError, harness.HarnessError) as exc:
        print(f"cellrw-harness: {exc}", file=sys.stderr)
        return 2
    if args.report == "json":
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    if args.command == "run" and not report["equal"]:
        return 1
    return 0
