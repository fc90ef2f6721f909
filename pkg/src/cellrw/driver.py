"""Per-cell orchestration: parse, scan, plan, splice, report.

Splicing is textual: statements outside matched windows are preserved
byte-for-byte (comments and formatting included); only replaced regions are
regenerated from trees.  A cell in which nothing matches is returned as the
same text object that came in.
"""

from __future__ import annotations

import ast
import difflib
import importlib.resources
import json
import textwrap
import time
from dataclasses import dataclass, field

from .codegen import InternalInvariantError, RewritePlan, plan_rewrite
from .library import builtin_rules
from .patterns import Registry, RuleMatch
from .syntax import (
    CellParseError,
    FreshNamePool,
    ParsedCell,
    harvest_identifiers,
    parse_cell,
    unparse_block,
)

OUTCOME_REWRITTEN = "rewritten"
OUTCOME_PASS_THROUGH = "pass-through"
OUTCOME_PARSE_FAILURE = "parse-failure"


@dataclass
class MatchRecord:
    rule: str
    span: tuple[int, int]  # 1-based inclusive source line numbers


@dataclass
class CellReport:
    cell_id: str
    outcome: str
    matches: list[MatchRecord] = field(default_factory=list)
    timings_us: dict[str, float] = field(default_factory=dict)
    bytes_in: int = 0
    bytes_out: int = 0

    def to_json(self) -> dict:
        return {
            "cell_id": self.cell_id,
            "outcome": self.outcome,
            "matches": [{"rule": m.rule, "span": list(m.span)} for m in self.matches],
            "timings_us": dict(self.timings_us),
            "bytes_in": self.bytes_in,
            "bytes_out": self.bytes_out,
        }


@dataclass
class RewriteResult:
    source: str
    report: CellReport

    @property
    def changed(self) -> bool:
        return self.report.outcome == OUTCOME_REWRITTEN


def report_schema() -> dict:
    """The JSON schema every emitted CellReport validates against."""
    text = (
        importlib.resources.files("cellrw").joinpath("report_schema.json").read_text("utf-8")
    )
    return json.loads(text)


def _now_us() -> float:
    return time.perf_counter_ns() / 1000.0


def _splice(cell: ParsedCell, plans: list[RewritePlan]) -> str:
    """Assemble the rewritten cell text.

    Each claimed window is replaced by its plan's statements, re-indented to
    the window's own indentation (window eligibility guarantees nothing but
    indentation precedes it on its first line).  Everything outside claimed
    windows, nested or not, is preserved byte-for-byte.
    """
    emitted: list[tuple[int, int, str]] = []
    for plan in plans:
        window = plan.match.original
        first_line, _ = cell.lines_of(window[0])
        start = cell.line_start(first_line)
        window_start, _ = cell.span(window[0])
        _, end = cell.span(window[-1])
        indent = cell.text[start:window_start]
        block = textwrap.indent(unparse_block(plan.replacement), indent)
        emitted.append((start, end, block))

    pieces: list[str] = []
    cursor = 0
    for start, end, text in sorted(emitted):
        pieces.append(cell.text[cursor:start])
        pieces.append(text)
        cursor = end
    pieces.append(cell.text[cursor:])
    return "".join(pieces)


def _match_span(cell: ParsedCell, match: RuleMatch) -> tuple[int, int]:
    first, _ = cell.lines_of(match.original[0])
    _, last = cell.lines_of(match.original[-1])
    return first, last


def rewrite_cell(
    src: str,
    history: str = "",
    registry: Registry | None = None,
    cell_id: str = "cell",
) -> RewriteResult:
    """Rewrite one cell; pass-through (same text object) when nothing matches.

    Content that does not parse (magics, shell escapes, partial snippets) is
    pass-through with outcome parse-failure, never an error.  Only a violated
    internal emission invariant raises.
    """
    if registry is None:
        registry = builtin_rules()
    bytes_in = len(src.encode("utf-8"))
    report = CellReport(cell_id=cell_id, outcome=OUTCOME_PASS_THROUGH, bytes_in=bytes_in)
    t0 = _now_us()
    try:
        cell = parse_cell(src, origin=cell_id)
    except CellParseError:
        report.outcome = OUTCOME_PARSE_FAILURE
        report.bytes_out = bytes_in
        elapsed = _now_us() - t0
        report.timings_us = {"parse": elapsed, "match": 0.0, "codegen": 0.0, "total": elapsed}
        return RewriteResult(source=src, report=report)
    t_parsed = _now_us()

    matches = scan(cell, registry, history)
    t_matched = _now_us()

    if not matches:
        report.bytes_out = bytes_in
        report.timings_us = {
            "parse": t_parsed - t0,
            "match": t_matched - t_parsed,
            "codegen": 0.0,
            "total": t_matched - t0,
        }
        return RewriteResult(source=src, report=report)

    pool = FreshNamePool(harvest_identifiers(src) | harvest_identifiers(history))
    plans = [plan_rewrite(match, pool) for match in matches]
    new_src = _splice(cell, plans)
    try:
        ast.parse(new_src)
    except SyntaxError as exc:  # pragma: no cover - would be a splicing bug
        raise InternalInvariantError(f"spliced cell does not parse: {exc}") from exc
    t_done = _now_us()

    report.outcome = OUTCOME_REWRITTEN
    report.matches = [
        MatchRecord(rule=m.rule.id, span=_match_span(cell, m)) for m in matches
    ]
    report.bytes_out = len(new_src.encode("utf-8"))
    report.timings_us = {
        "parse": t_parsed - t0,
        "match": t_matched - t_parsed,
        "codegen": t_done - t_matched,
        "total": t_done - t0,
    }
    return RewriteResult(source=new_src, report=report)


def scan(cell: ParsedCell, registry: Registry, history: str = "") -> list[RuleMatch]:
    from .patterns import scan_cell

    return scan_cell(cell, registry, history)


# --- notebook documents ------------------------------------------------------


class NotebookError(Exception):
    """The document is not a readable notebook."""


def _cell_source(cell: dict) -> str:
    source = cell.get("source", "")
    if isinstance(source, list):
        return "".join(source)
    if isinstance(source, str):
        return source
    raise NotebookError("cell source is neither string nor list")


def rewrite_notebook(
    data: bytes,
    registry: Registry | None = None,
) -> tuple[bytes, list[CellReport]]:
    """Process a notebook document: code cells in order, history threaded.

    An untouched document is returned as the original bytes object.  When any
    cell changes, only the `source` fields of changed code cells differ in the
    re-serialized document.
    """
    if registry is None:
        registry = builtin_rules()
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NotebookError(str(exc)) from exc
    cells = document.get("cells")
    if not isinstance(cells, list):
        raise NotebookError("document has no cells list")

    reports: list[CellReport] = []
    history_parts: list[str] = []
    changed = False
    for index, cell in enumerate(cells):
        if not isinstance(cell, dict) or cell.get("cell_type") != "code":
            continue
        cell_id = str(cell.get("id") or f"cell-{index}")
        source = _cell_source(cell)
        result = rewrite_cell(
            source,
            history="".join(history_parts),
            registry=registry,
            cell_id=cell_id,
        )
        reports.append(result.report)
        # history keeps what the user wrote, not what we emitted: later
        # function-source digests must match the original definitions
        history_parts.append(source if source.endswith("\n") else source + "\n")
        if result.changed:
            changed = True
            if isinstance(cell.get("source"), list):
                cell["source"] = result.source.splitlines(keepends=True)
            else:
                cell["source"] = result.source

    if not changed:
        return data, reports
    text = json.dumps(document, ensure_ascii=False, indent=1)
    if not text.endswith("\n"):
        text += "\n"
    return text.encode("utf-8"), reports


# --- explanations -------------------------------------------------------------


def explain(src: str, history: str = "", registry: Registry | None = None) -> str:
    """Unified diff plus one row per match (rule, lines, guard)."""
    if registry is None:
        registry = builtin_rules()
    result = rewrite_cell(src, history=history, registry=registry)
    lines: list[str] = []
    if result.changed:
        diff = difflib.unified_diff(
            src.splitlines(keepends=True),
            result.source.splitlines(keepends=True),
            fromfile="original",
            tofile="rewritten",
            lineterm="",
        )
        lines.extend(line.rstrip("\n") for line in diff)
    else:
        lines.append(f"no rewrite ({result.report.outcome})")
    if result.changed:
        cell = parse_cell(src)
        pool = FreshNamePool(harvest_identifiers(src) | harvest_identifiers(history))
        lines.append("")
        lines.append(f"{'rule':<16} {'lines':<8} guard")
        for match in scan(cell, registry, history):
            plan = plan_rewrite(match, pool)
            first, last = _match_span(cell, match)
            guard = plan.guard_text() or "-"
            lines.append(f"{match.rule.id:<16} {f'{first}-{last}':<8} {guard}")
    return "\n".join(lines) + "\n"
