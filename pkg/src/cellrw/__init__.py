"""Guarded source-to-source rewriting of dataframe-heavy notebook cells.

The engine matches a fixed library of rewrite rules against cell syntax
trees and splices in faster equivalents wrapped in runtime precondition
guards; whenever a guard fails at execution time, the original code runs.
"""

from .codegen import (
    ColumnMathOnly,
    IfElseVectorizable,
    InternalInvariantError,
    RewritePlan,
    SubstringSearch,
    Unknown,
    Untranslatable,
    classify_function,
    plan_rewrite,
    resolve_function,
    source_digest,
    vectorize_condition,
)
from .driver import (
    CellReport,
    MatchRecord,
    NotebookError,
    RewriteResult,
    explain,
    report_schema,
    rewrite_cell,
    rewrite_notebook,
)
from .library import builtin_rules
from .patterns import Registry, RewriteRule, RuleError, scan_cell
from .syntax import CellParseError, parse_cell

__version__ = "0.1.0"

__all__ = [
    "CellParseError",
    "CellReport",
    "ColumnMathOnly",
    "IfElseVectorizable",
    "InternalInvariantError",
    "MatchRecord",
    "NotebookError",
    "Registry",
    "RewritePlan",
    "RewriteResult",
    "RewriteRule",
    "RuleError",
    "SubstringSearch",
    "Unknown",
    "Untranslatable",
    "builtin_rules",
    "classify_function",
    "explain",
    "parse_cell",
    "plan_rewrite",
    "report_schema",
    "resolve_function",
    "rewrite_cell",
    "rewrite_notebook",
    "scan_cell",
    "source_digest",
    "vectorize_condition",
    "__version__",
]
