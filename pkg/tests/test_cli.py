import json
import subprocess
import sys

import pytest

import cellrw.cli as cli
from cellrw.codegen import InternalInvariantError

CELL = "df['A'].sort_values().head(5)\n"
PLAIN = "x = 1\n"


def run_cli(*args, stdin=None, env=None):
    cmd = [sys.executable, "-m", "cellrw", *args]
    return subprocess.run(cmd, input=stdin, capture_output=True, text=True, env=env)


def reports_of(proc):
    lines = [l for l in proc.stderr.splitlines() if l.strip()]
    return [json.loads(l) for l in lines]


def test_stdin_roundtrip_rewrites():
    proc = run_cli("rewrite", "--stdin", stdin=CELL)
    assert proc.returncode == 0
    assert "__cellrw_" in proc.stdout
    (report,) = reports_of(proc)
    assert report["cell_id"] == "stdin"
    assert report["outcome"] == "rewritten"


def test_stdin_is_the_default_source():
    proc = run_cli("rewrite", stdin=PLAIN)
    assert proc.returncode == 0
    assert proc.stdout == PLAIN


def test_file_input_and_report(tmp_path):
    path = tmp_path / "cell.py"
    path.write_text(CELL)
    proc = run_cli("rewrite", "--file", str(path))
    assert proc.returncode == 0
    (report,) = reports_of(proc)
    assert report["cell_id"] == "cell.py"
    assert report["matches"][0]["rule"] == "nsmallest"
    assert path.read_text() == CELL


def test_in_place_updates_file(tmp_path):
    path = tmp_path / "cell.py"
    path.write_text(CELL)
    proc = run_cli("rewrite", "--file", str(path), "--in-place", "--report", "none")
    assert proc.returncode == 0
    assert proc.stdout == ""
    assert proc.stderr == ""
    assert "__cellrw_" in path.read_text()


def test_in_place_requires_a_file():
    proc = run_cli("rewrite", "--in-place", stdin=CELL)
    assert proc.returncode == 2


def test_report_none_silences_stderr():
    proc = run_cli("rewrite", "--report", "none", stdin=CELL)
    assert proc.returncode == 0
    assert proc.stderr == ""


def test_parse_failure_is_still_exit_zero():
    src = "%%time\nx = 1\n"
    proc = run_cli("rewrite", stdin=src)
    assert proc.returncode == 0
    assert proc.stdout == src
    (report,) = reports_of(proc)
    assert report["outcome"] == "parse-failure"


def test_missing_file_is_exit_two(tmp_path):
    proc = run_cli("rewrite", "--file", str(tmp_path / "absent.py"))
    assert proc.returncode == 2
    assert "cannot read input" in proc.stderr


def test_undecodable_file_is_exit_two(tmp_path):
    path = tmp_path / "cell.py"
    path.write_bytes(b"\xff\xfe\x00bad")
    proc = run_cli("rewrite", "--file", str(path))
    assert proc.returncode == 2


def test_malformed_notebook_is_exit_two(tmp_path):
    path = tmp_path / "doc.ipynb"
    path.write_text("{broken")
    proc = run_cli("rewrite", "--notebook", str(path))
    assert proc.returncode == 2
    assert "notebook" in proc.stderr


def test_missing_history_is_exit_two(tmp_path):
    proc = run_cli("rewrite", "--history", str(tmp_path / "gone.py"), stdin=CELL)
    assert proc.returncode == 2


def test_unknown_rule_id_is_exit_two():
    proc = run_cli("rewrite", "--rules", "bogus", stdin=CELL)
    assert proc.returncode == 2
    assert "unknown rule" in proc.stderr


def test_rules_flag_limits_matching():
    proc = run_cli("rewrite", "--rules", "concat-lists", stdin=CELL)
    assert proc.returncode == 0
    assert proc.stdout == CELL


def test_disable_flag_limits_matching():
    proc = run_cli("rewrite", "--disable", "nsmallest", stdin=CELL)
    assert proc.stdout == CELL
    proc = run_cli("rewrite", "--disable", "concat-lists", stdin=CELL)
    assert "__cellrw_" in proc.stdout


def test_rules_env_var_supplies_default(tmp_path, monkeypatch):
    import os

    env = dict(os.environ, CELLRW_RULES="concat-lists")
    proc = run_cli("rewrite", stdin=CELL, env=env)
    assert proc.stdout == CELL
    # explicit --rules wins over the environment
    proc = run_cli("rewrite", "--rules", "nsmallest", stdin=CELL, env=env)
    assert "__cellrw_" in proc.stdout


def test_history_file_enables_deferred_rule(tmp_path):
    history = tmp_path / "history.py"
    history.write_text("def calc(row):\n    a = row['A']\n    return a + 1\n")
    proc = run_cli("rewrite", "--history", str(history), stdin="df.apply(calc, axis=1)\n")
    assert proc.returncode == 0
    assert "calc(" in proc.stdout and "__cellrw_ok" in proc.stdout


def test_notebook_roundtrip(tmp_path):
    doc = {
        "cells": [
            {"cell_type": "code", "metadata": {}, "outputs": [],
             "execution_count": None, "source": CELL},
        ],
        "metadata": {}, "nbformat": 4, "nbformat_minor": 5,
    }
    path = tmp_path / "doc.ipynb"
    path.write_text(json.dumps(doc, indent=1))
    proc = run_cli("rewrite", "--notebook", str(path))
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert "__cellrw_" in "".join(out["cells"][0]["source"])
    (report,) = reports_of(proc)
    assert report["outcome"] == "rewritten"

    proc = run_cli("rewrite", "--notebook", str(path), "--in-place", "--report", "none")
    assert proc.returncode == 0
    assert "__cellrw_" in path.read_text()


def test_diff_mode_prints_explanation():
    proc = run_cli("rewrite", "--diff", stdin=CELL)
    assert proc.returncode == 0
    assert "+++" in proc.stdout and "nsmallest" in proc.stdout


def test_file_and_notebook_are_mutually_exclusive(tmp_path):
    proc = run_cli("rewrite", "--file", "a.py", "--notebook", "b.ipynb")
    assert proc.returncode == 2


def test_internal_invariant_violation_is_exit_three(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise InternalInvariantError("spliced source does not reparse")

    monkeypatch.setattr(cli, "rewrite_cell", boom)
    monkeypatch.setattr(sys, "stdin", _FakeStdin(CELL))
    code = cli.main(["rewrite", "--stdin"])
    assert code == 3
    assert "internal invariant" in capsys.readouterr().err


class _FakeStdin:
    def __init__(self, text):
        self._text = text

    def read(self):
        return self._text


def test_report_lines_are_single_json_objects():
    proc = run_cli("rewrite", stdin=CELL)
    for line in proc.stderr.splitlines():
        parsed = json.loads(line)
        assert set(parsed) == {
            "cell_id", "outcome", "matches", "timings_us", "bytes_in", "bytes_out"
        }
