"""Session behavior: engine routing, history fidelity, fallback totality."""

import logging
import os
from pathlib import Path

import pandas as pd
import pytest

from cellrw_shim import SessionState, install, uninstall
from cellrw_shim.session import MODE_ENV

NSMALLEST_CELL = "smallest = df['A'].sort_values().head(n=5)\n"

CALC_CELL = """\
def calc(x):
    a = x['a']
    b = x['b']
    return a + b
"""

# a fake engine that answers with garbage source but a plausible report
GARBAGE_ENGINE = (
    "/bin/sh",
    "-c",
    'cat > /dev/null; printf "def (broken"; printf \'{"outcome": "rewritten"}\\n\' >&2',
)


def test_matchable_cell_comes_back_rewritten(session):
    out = session.process(NSMALLEST_CELL)
    assert "nsmallest" in out
    assert session.last_report["outcome"] == "rewritten"
    assert session.last_report["matches"][0]["rule"] == "nsmallest"


def test_plain_cell_passes_through_unchanged(session):
    src = "total = values.sum()\n"
    assert session.process(src) == src
    assert session.last_report["outcome"] == "pass-through"


def test_unparsable_cell_flows_through(session):
    src = "%%time\nx = 1\n"
    assert session.process(src) == src
    assert session.last_report["outcome"] == "parse-failure"


def test_history_holds_originals_in_order(session):
    cells = ["x = 1\n", NSMALLEST_CELL, "print(x)"]
    for cell in cells:
        session.process(cell)
    text = Path(session.history_path).read_text()
    assert text == "x = 1\n" + NSMALLEST_CELL + "print(x)\n"
    assert "__cellrw" not in text


def test_history_enables_cross_cell_resolution(session):
    session.process(CALC_CELL)
    out = session.process("totals = df.apply(calc, axis=1)\n")
    assert session.last_report["matches"][0]["rule"] == "apply-direct"
    assert "__cellrw_ok" in out


def test_disabled_rule_is_not_applied(session):
    session.rules["nsmallest"] = False
    assert session.process(NSMALLEST_CELL) == NSMALLEST_CELL
    assert session.last_report["outcome"] == "pass-through"


def test_engine_timeout_falls_back(tmp_path, caplog):
    state = SessionState(
        history_path=str(tmp_path / "h.py"),
        engine=("/bin/sh", "-c", "sleep 30"),
        timeout=0.1,
    )
    with caplog.at_level(logging.WARNING, logger="cellrw_shim.session"):
        assert state.process(NSMALLEST_CELL) == NSMALLEST_CELL
    assert "running cell as written" in caplog.text
    # the cell still lands in history; a later healthy engine sees it
    assert NSMALLEST_CELL in Path(state.history_path).read_text()


def test_engine_crash_falls_back(tmp_path, caplog):
    state = SessionState(history_path=str(tmp_path / "h.py"), engine=("/bin/sh", "-c", "exit 7"))
    with caplog.at_level(logging.WARNING, logger="cellrw_shim.session"):
        assert state.process(NSMALLEST_CELL) == NSMALLEST_CELL
    assert "running cell as written" in caplog.text


def test_unparsable_engine_output_falls_back(tmp_path, caplog):
    state = SessionState(history_path=str(tmp_path / "h.py"), engine=GARBAGE_ENGINE)
    with caplog.at_level(logging.WARNING, logger="cellrw_shim.session"):
        assert state.process(NSMALLEST_CELL) == NSMALLEST_CELL
    assert "unparsable" in caplog.text


def test_create_provisions_a_history_file():
    state = SessionState.create()
    try:
        assert os.path.exists(state.history_path)
        assert Path(state.history_path).read_text() == ""
    finally:
        os.unlink(state.history_path)


# --- IPython integration ----------------------------------------------------

pytest.importorskip("IPython")


@pytest.fixture
def shell(tmp_path):
    from IPython.core.interactiveshell import InteractiveShell

    ip = InteractiveShell.instance()

    def attach(mode=None):
        state = SessionState(history_path=str(tmp_path / "kernel-history.py"), timeout=15.0)
        install(ip, state=state, mode=mode)
        return state

    yield ip, attach
    uninstall(ip)


def test_hook_mode_executes_the_rewritten_cell(shell):
    ip, attach = shell
    state = attach()
    df = pd.DataFrame({"A": [5.0, 1.0, 4.0, 2.0, 8.0, 3.0, 9.0, 7.0, 6.0, 0.5]})
    ip.user_ns.update(pd=pd, df=df)
    result = ip.run_cell(NSMALLEST_CELL)
    assert result.success
    assert state.last_report["outcome"] == "rewritten"
    assert ip.user_ns["smallest"].equals(df["A"].sort_values().head(5))
    history = Path(state.history_path).read_text()
    assert "sort_values().head(n=5)" in history
    assert "__cellrw" not in history


def test_hook_mode_resolves_functions_across_cells(shell):
    ip, attach = shell
    state = attach()
    frame = pd.DataFrame({"a": [1.5, 2.5, 3.5, 4.5], "b": [10.0, 20.0, 30.0, 40.0]})
    ip.user_ns.update(pd=pd, df=frame)
    assert ip.run_cell(CALC_CELL).success
    assert ip.run_cell("totals = df.apply(calc, axis=1)\n").success
    assert state.last_report["matches"][0]["rule"] == "apply-direct"
    # the source digest matched, so the vectorized branch ran, not .apply
    assert ip.user_ns["__cellrw_ok"] is True
    assert ip.user_ns["totals"].equals(frame["a"] + frame["b"])


def test_magic_mode_only_touches_marked_cells(shell):
    ip, attach = shell
    state = attach(mode="magic")
    ip.user_ns.update(pd=pd, df=pd.DataFrame({"A": [3.0, 1.0, 2.0, 5.0, 4.0, 0.0]}))
    assert ip.run_cell("plain = df['A'].sort_values().head(n=2)\n").success
    assert state.last_report is None
    assert ip.run_cell("%%cellrw\npicked = df['A'].sort_values().head(n=2)\n").success
    assert state.last_report["outcome"] == "rewritten"
    assert ip.user_ns["picked"].equals(ip.user_ns["plain"])


def test_mode_comes_from_the_environment(shell, monkeypatch):
    ip, attach = shell
    monkeypatch.setenv(MODE_ENV, "magic")
    attach()
    assert "cellrw" in ip.magics_manager.magics["cell"]


def test_unknown_mode_is_rejected(shell):
    ip, attach = shell
    with pytest.raises(ValueError, match="unknown shim mode"):
        install(ip, mode="both")
