"""Notebook-side companion to the cellrw engine.

Two halves: a kernel hook that routes cells through the engine before they
run (``%load_ext cellrw_shim`` in IPython), and a harness that checks every
builtin rule against an execution oracle on seeded random data and measures
the speedups the rewrites deliver.
"""

from .engine import DEFAULT_ENGINE, EngineError, EngineResult, invoke
from .harness import (
    RULE_IDS,
    CaseFamily,
    CellRun,
    EquivalenceCase,
    GeneratorSpec,
    HarnessError,
    TimingPair,
    Verdict,
    check_equivalence,
    compare_values,
    families,
    materialize,
    rewrite_case,
    run_cell,
    run_sweep,
    run_timings,
    time_pair,
    timed_family,
)
from .session import (
    SessionState,
    install,
    load_ipython_extension,
    uninstall,
    unload_ipython_extension,
)

__all__ = [
    "DEFAULT_ENGINE",
    "EngineError",
    "EngineResult",
    "invoke",
    "RULE_IDS",
    "CaseFamily",
    "CellRun",
    "EquivalenceCase",
    "GeneratorSpec",
    "HarnessError",
    "TimingPair",
    "Verdict",
    "check_equivalence",
    "compare_values",
    "families",
    "materialize",
    "rewrite_case",
    "run_cell",
    "run_sweep",
    "run_timings",
    "time_pair",
    "timed_family",
    "SessionState",
    "install",
    "uninstall",
    "load_ipython_extension",
    "unload_ipython_extension",
]
