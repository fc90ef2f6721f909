"""Kernel-side integration: route each cell through the engine, run the result.

A session owns a history file recording every cell it has processed, in
original form.  Rewritten forms never land there: the engine analyzes later
cells against what the user actually wrote, and guard scaffolding would
poison its view of function definitions.
"""

from __future__ import annotations

import ast
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .engine import DEFAULT_ENGINE, EngineError, invoke

log = logging.getLogger(__name__)

# seconds; a hook that stalls the kernel is worse than the loop it would fix
ENGINE_TIMEOUT = 0.25

MODE_ENV = "CELLRW_SHIM_MODE"


@dataclass
class SessionState:
    """One notebook session's view of the engine."""

    history_path: str
    engine: tuple[str, ...] = DEFAULT_ENGINE
    rules: dict[str, bool] = field(default_factory=dict)
    timeout: float = ENGINE_TIMEOUT
    last_report: dict | None = None

    def __post_init__(self) -> None:
        # the engine refuses a missing history file, so guarantee one
        Path(self.history_path).touch(exist_ok=True)

    @classmethod
    def create(cls, **kwargs) -> "SessionState":
        fd, path = tempfile.mkstemp(prefix="cellrw-history-", suffix=".py")
        os.close(fd)
        return cls(history_path=path, **kwargs)

    def process(self, source: str) -> str:
        """Rewrite one cell, or return it unchanged if the engine cannot.

        The original source is appended to the history either way; the engine
        call for this cell sees only the cells before it.  No engine failure
        may keep the cell from running, so every problem degrades to handing
        the source back untouched.
        """
        disabled = tuple(sorted(k for k, v in self.rules.items() if not v))
        try:
            result = invoke(
                source,
                engine=self.engine,
                history_path=self.history_path,
                disable=disabled,
                timeout=self.timeout,
            )
        except EngineError as exc:
            log.warning("cellrw engine unavailable, running cell as written: %s", exc)
            self._append(source)
            return source
        self.last_report = result.report
        out = result.source
        if result.report.get("outcome") == "rewritten":
            # parse failures of the original cell come back verbatim and stay
            # the kernel's business; a malformed *rewrite* must never run
            try:
                ast.parse(out)
            except SyntaxError:
                log.warning("cellrw engine produced unparsable output, running cell as written")
                out = source
        self._append(source)
        return out

    def _append(self, source: str) -> None:
        # each cell is newline-terminated so consecutive cells never share a line
        with open(self.history_path, "a", encoding="utf-8") as f:
            f.write(source if source.endswith("\n") else source + "\n")


_active: dict[int, tuple[SessionState, object]] = {}


def install(ip, state: SessionState | None = None, mode: str | None = None) -> SessionState:
    """Attach to an IPython shell; returns the session for inspection.

    Two modes, chosen by argument or the CELLRW_SHIM_MODE variable:
    "hook" (default) routes every cell through the engine via an input
    transformer; "magic" only touches cells marked %%cellrw.
    """
    mode = mode or os.environ.get(MODE_ENV, "hook")
    if mode not in ("hook", "magic"):
        raise ValueError(f"unknown shim mode: {mode!r}")
    state = state or SessionState.create()

    if mode == "hook":

        def _route(lines: list) -> list:
            out = state.process("".join(lines))
            return out.splitlines(keepends=True) or [""]

        # keeps completion machinery from running the hook speculatively
        _route.has_side_effects = True
        ip.input_transformers_post.append(_route)
        handle: object = _route
    else:

        def _cellrw(line, cell):
            ip.run_cell(state.process(cell))

        ip.register_magic_function(_cellrw, "cell", "cellrw")
        handle = "cellrw"

    _active[id(ip)] = (state, handle)
    return state


def uninstall(ip) -> None:
    _, handle = _active.pop(id(ip), (None, None))
    if handle is None:
        return
    if isinstance(handle, str):
        ip.magics_manager.magics["cell"].pop(handle, None)
    else:
        try:
            ip.input_transformers_post.remove(handle)
        except ValueError:
            pass


def load_ipython_extension(ip) -> None:
    install(ip)


def unload_ipython_extension(ip) -> None:
    uninstall(ip)
