"""Shared helpers for the test suite (importable, unlike conftest)."""

import ast
from pathlib import Path

DATA = Path(__file__).parent / "data"
GOLDENS = Path(__file__).parent / "goldens"

GOLDEN_NAMES = [
    "nsmallest_basic",
    "concat_lists",
    "split_columns",
    "split_tuple",
    "apply_direct",
    "apply_select",
    "substr_contains",
]


def golden(name: str) -> tuple[str, str]:
    src = (GOLDENS / f"{name}.in.py").read_text()
    want = (GOLDENS / f"{name}.out.py").read_text()
    return src, want


class _TempCanonicalizer(ast.NodeTransformer):
    """Rename generated __cellrw_* names to positional placeholders."""

    def __init__(self):
        self.mapping: dict[str, str] = {}

    def _canon(self, name: str) -> str:
        if not name.startswith("__cellrw_"):
            return name
        if name not in self.mapping:
            self.mapping[name] = f"__t{len(self.mapping)}"
        return self.mapping[name]

    def visit_Name(self, node: ast.Name):
        node.id = self._canon(node.id)
        return node

    def visit_alias(self, node: ast.alias):
        if node.asname:
            node.asname = self._canon(node.asname)
        return node


def canonical_dump(source: str) -> str:
    tree = ast.parse(source)
    _TempCanonicalizer().visit(tree)
    return ast.dump(tree)
