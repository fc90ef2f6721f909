"""Subprocess plumbing for the rewrite engine.

The engine is consumed strictly through its command line: source goes in on
stdin, rewritten source comes back on stdout, and the per-cell report arrives
as one JSON object on stderr.  Nothing in this package imports the engine's
own modules; the shim honors the process boundary a kernel deployment has.
"""

from __future__ import annotations

import json
import subprocess
import sys
from dataclasses import dataclass

DEFAULT_ENGINE: tuple[str, ...] = (sys.executable, "-m", "cellrw")


class EngineError(RuntimeError):
    """The engine invocation failed: crash, timeout, or unusable output."""


@dataclass(frozen=True)
class EngineResult:
    source: str
    report: dict


def invoke(
    source: str,
    *,
    engine: tuple[str, ...] = DEFAULT_ENGINE,
    history_path: str | None = None,
    disable: tuple[str, ...] = (),
    rules: tuple[str, ...] | None = None,
    timeout: float = 5.0,
) -> EngineResult:
    """Run one cell through the engine, returning its output and report.

    Any failure mode raises EngineError; callers decide whether that means
    falling back to the original source (the kernel hook) or aborting the
    experiment (the harness).
    """
    argv = [*engine, "rewrite", "--stdin", "--report", "json"]
    if history_path:
        argv += ["--history", history_path]
    if rules is not None:
        argv += ["--rules", ",".join(rules)]
    if disable:
        argv += ["--disable", ",".join(disable)]
    try:
        proc = subprocess.run(
            argv,
            input=source,
            capture_output=True,
            encoding="utf-8",
            timeout=timeout,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise EngineError(f"engine did not answer: {exc}") from exc
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-1:] or [""]
        raise EngineError(f"engine exited {proc.returncode}: {tail[0]}")
    try:
        report = json.loads(proc.stderr.strip().splitlines()[-1])
    except (IndexError, json.JSONDecodeError) as exc:
        raise EngineError(f"unreadable engine report: {exc}") from exc
    return EngineResult(source=proc.stdout, report=report)
