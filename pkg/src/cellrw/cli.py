"""Command-line entry point.

`cellrw rewrite` reads one cell (or a whole notebook), writes the rewritten
source to stdout (or back to the file with --in-place), and emits one JSON
report object per cell on stderr.  Exit codes: 0 processed (rewritten or not),
2 unreadable input, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .codegen import InternalInvariantError
from .driver import NotebookError, explain, rewrite_cell, rewrite_notebook
from .library import builtin_rules
from .patterns import Registry

RULES_ENV_VAR = "CELLRW_RULES"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cellrw")
    sub = parser.add_subparsers(dest="command", required=True)

    rw = sub.add_parser("rewrite", help="rewrite a cell or notebook")
    source = rw.add_mutually_exclusive_group()
    source.add_argument("--file", metavar="F", help="read one cell from a source file")
    source.add_argument("--notebook", metavar="F", help="process a notebook document")
    source.add_argument("--stdin", action="store_true", help="read one cell from stdin (default)")
    rw.add_argument("--history", metavar="F", help="file holding previously executed sources")
    rw.add_argument(
        "--rules",
        metavar="ID,ID,...",
        help=f"enable only these rules (default: ${RULES_ENV_VAR} or all)",
    )
    rw.add_argument("--disable", metavar="ID,ID,...", help="disable these rules")
    rw.add_argument("--report", choices=["json", "none"], default="json")
    rw.add_argument("--diff", action="store_true", help="print a diff and match table instead")
    rw.add_argument("--in-place", action="store_true", help="write the result back to the input file")
    return parser


def _select_registry(args: argparse.Namespace) -> Registry:
    registry = builtin_rules()
    rules = args.rules if args.rules is not None else os.environ.get(RULES_ENV_VAR)
    only = [r.strip() for r in rules.split(",") if r.strip()] if rules else None
    disable = (
        [r.strip() for r in args.disable.split(",") if r.strip()] if args.disable else []
    )
    return registry.select(only=only, disable=disable)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit_reports(reports, stream) -> None:
    for report in reports:
        json.dump(report.to_json(), stream, separators=(", ", ": "))
        stream.write("\n")


def _run_rewrite(args: argparse.Namespace) -> int:
    try:
        registry = _select_registry(args)
    except KeyError as exc:
        print(f"cellrw: unknown rule id {exc.args[0]!r}", file=sys.stderr)
        return 2

    history = ""
    if args.history:
        try:
            history = _read_text(args.history)
        except OSError as exc:
            print(f"cellrw: cannot read history: {exc}", file=sys.stderr)
            return 2

    if args.in_place and not (args.file or args.notebook):
        print("cellrw: --in-place requires --file or --notebook", file=sys.stderr)
        return 2

    if args.notebook:
        try:
            data = Path(args.notebook).read_bytes()
        except OSError as exc:
            print(f"cellrw: cannot read input: {exc}", file=sys.stderr)
            return 2
        try:
            out, reports = rewrite_notebook(data, registry=registry)
        except NotebookError as exc:
            print(f"cellrw: not a readable notebook: {exc}", file=sys.stderr)
            return 2
        if args.report == "json":
            _emit_reports(reports, sys.stderr)
        if args.in_place:
            Path(args.notebook).write_bytes(out)
        else:
            sys.stdout.write(out.decode("utf-8"))
        return 0

    if args.file:
        try:
            src = _read_text(args.file)
        except (OSError, UnicodeDecodeError) as exc:
            print(f"cellrw: cannot read input: {exc}", file=sys.stderr)
            return 2
        cell_id = Path(args.file).name
    else:
        src = sys.stdin.read()
        cell_id = "stdin"

    if args.diff:
        sys.stdout.write(explain(src, history=history, registry=registry))
        return 0

    result = rewrite_cell(src, history=history, registry=registry, cell_id=cell_id)
    if args.report == "json":
        _emit_reports([result.report], sys.stderr)
    if args.in_place:
        Path(args.file).write_text(result.source, encoding="utf-8")
    else:
        sys.stdout.write(result.source)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "rewrite":
            return _run_rewrite(args)
        raise AssertionError(args.command)
    except InternalInvariantError as exc:
        print(f"cellrw: internal invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
