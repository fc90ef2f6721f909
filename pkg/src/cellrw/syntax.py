"""Parsing, spans, canonical unparsing, and fresh-name generation.

Everything downstream works on plain ``ast`` nodes; this module owns the
text-side bookkeeping: byte-accurate source spans for splicing, structural
equality that ignores formatting, and a collision-free name pool for
generated temporaries.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

# Every generated identifier starts with this prefix.  Statement windows whose
# source already contains it are never rewritten, which is what makes the
# engine idempotent on its own output.
RESERVED_PREFIX = "__cellrw_"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class CellParseError(Exception):
    """Cell source is not parseable (magics, shell escapes, syntax errors).

    Never fatal: callers pass the cell through untouched.
    """

    def __init__(self, line: int, column: int, message: str = "") -> None:
        super().__init__(message or f"unparseable cell at {line}:{column}")
        self.line = line
        self.column = column


@dataclass
class ParsedCell:
    """A cell's text together with its module tree and span arithmetic."""

    text: str
    module: ast.Module
    origin: str = "cell"
    _line_starts: list[int] = field(default_factory=list, repr=False)
    _line_bytes: list[bytes] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        offset = 0
        for line in self.text.split("\n"):
            self._line_starts.append(offset)
            self._line_bytes.append(line.encode("utf-8"))
            offset += len(line) + 1

    def offset_at(self, lineno: int, byte_col: int) -> int:
        """Character offset of a (1-based line, UTF-8 byte column) position."""
        start = self._line_starts[lineno - 1]
        raw = self._line_bytes[lineno - 1]
        if byte_col <= 0:
            return start
        return start + len(raw[:byte_col].decode("utf-8"))

    def line_start(self, lineno: int) -> int:
        return self._line_starts[lineno - 1]

    def line_end(self, lineno: int) -> int:
        start = self._line_starts[lineno - 1]
        return start + len(self._line_bytes[lineno - 1].decode("utf-8"))

    def span(self, node: ast.AST) -> tuple[int, int]:
        """Character span covering the node's whole subtree.

        Computed over the subtree because decorators sit outside their
        function's own position range; taking the min/max keeps child spans
        nested inside parent spans.
        """
        (l1, c1), (l2, c2) = _subtree_bounds(node)
        return self.offset_at(l1, c1), self.offset_at(l2, c2)

    def lines_of(self, node: ast.AST) -> tuple[int, int]:
        """1-based inclusive line range of the node's subtree."""
        (l1, _), (l2, _) = _subtree_bounds(node)
        return l1, l2

    def segment(self, node: ast.AST) -> str:
        start, end = self.span(node)
        return self.text[start:end]


def _subtree_bounds(node: ast.AST) -> tuple[tuple[int, int], tuple[int, int]]:
    lo: tuple[int, int] | None = None
    hi: tuple[int, int] | None = None
    for sub in ast.walk(node):
        lineno = getattr(sub, "lineno", None)
        if lineno is None:
            continue
        start = (lineno, sub.col_offset)
        end = (sub.end_lineno, sub.end_col_offset)
        if lo is None or start < lo:
            lo = start
        if hi is None or end > hi:
            hi = end
    if lo is None or hi is None:
        raise ValueError(f"node {type(node).__name__} carries no positions")
    return lo, hi


def parse_cell(text: str, origin: str = "cell") -> ParsedCell:
    """Parse one cell. Raises CellParseError on anything ast cannot read."""
    try:
        module = ast.parse(text)
    except SyntaxError as exc:
        raise CellParseError(exc.lineno or 1, exc.offset or 0, str(exc)) from exc
    except ValueError as exc:  # e.g. NUL bytes
        raise CellParseError(1, 0, str(exc)) from exc
    return ParsedCell(text=text, module=module, origin=origin)


def unparse(node: ast.AST) -> str:
    """Canonical, deterministic source for a tree."""
    return ast.unparse(node)


def unparse_block(stmts: Iterable[ast.stmt]) -> str:
    return "\n".join(ast.unparse(stmt) for stmt in stmts)


def structurally_equal(a: ast.AST, b: ast.AST) -> bool:
    """Tree equality that ignores spans, formatting, and comments."""
    return ast.dump(a) == ast.dump(b)


def identifiers_in(node: ast.AST) -> set[str]:
    """All identifiers bound or mentioned anywhere in the tree."""
    names: set[str] = set()
    for sub in ast.walk(node):
        if isinstance(sub, ast.Name):
            names.add(sub.id)
        elif isinstance(sub, ast.arg):
            names.add(sub.arg)
        elif isinstance(sub, ast.Attribute):
            names.add(sub.attr)
        elif isinstance(sub, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            names.add(sub.name)
        elif isinstance(sub, ast.alias):
            names.add(sub.asname or sub.name.split(".")[0])
        elif isinstance(sub, ast.keyword) and sub.arg:
            names.add(sub.arg)
        elif isinstance(sub, (ast.Global, ast.Nonlocal)):
            names.update(sub.names)
        elif isinstance(sub, ast.ExceptHandler) and sub.name:
            names.add(sub.name)
    return names


def harvest_identifiers(text: str) -> set[str]:
    """Identifier-shaped tokens in raw text.

    Regex superset of the AST identifiers (it also picks up words inside
    strings and comments), which only ever makes the forbidden set larger.
    Works on unparseable history buffers.
    """
    return set(_IDENT_RE.findall(text))


class FreshNamePool:
    """Hands out sentinel-prefixed names that collide with nothing in scope."""

    def __init__(self, forbidden: Iterable[str] = (), prefix: str = RESERVED_PREFIX) -> None:
        self._taken = set(forbidden)
        self.prefix = prefix

    def fresh(self, base: str) -> str:
        name = self.prefix + base
        counter = 0
        while name in self._taken:
            counter += 1
            name = f"{self.prefix}{base}_{counter}"
        self._taken.add(name)
        return name

    def __contains__(self, name: str) -> bool:
        return name in self._taken


def walk_statement_lists(
    module: ast.Module,
) -> Iterator[tuple[tuple[tuple[str, int], ...], str, list[ast.stmt]]]:
    """Yield every statement list in the module with its navigation path.

    A path is a sequence of (field, index) steps from the module to the node
    owning the list; the second element names the list-valued field.  The
    module body itself is yielded first with an empty path.
    """

    def visit(owner: ast.AST, path: tuple[tuple[str, int], ...]) -> Iterator:
        for field_name in ("body", "orelse", "finalbody"):
            block = getattr(owner, field_name, None)
            if not isinstance(block, list) or not block:
                continue
            if not all(isinstance(s, ast.stmt) for s in block):
                continue
            yield path, field_name, block
            for idx, stmt in enumerate(block):
                yield from visit(stmt, path + ((field_name, idx),))
        for field_name in ("handlers", "cases"):
            group = getattr(owner, field_name, None)
            if not isinstance(group, list):
                continue
            for idx, item in enumerate(group):
                yield from visit(item, path + ((field_name, idx),))

    yield from visit(module, ())


def resolve_path(module: ast.Module, path: tuple[tuple[str, int], ...], list_field: str) -> list[ast.stmt]:
    """Navigate a path produced by walk_statement_lists on (a copy of) module."""
    node: ast.AST = module
    for field_name, idx in path:
        node = getattr(node, field_name)[idx]
    return getattr(node, list_field)
