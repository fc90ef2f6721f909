"""End-to-end runs of the cellrw-harness command line."""

import json
import subprocess
import sys

HARNESS = (sys.executable, "-m", "cellrw_shim")


def run_harness(*args):
    return subprocess.run(
        [*HARNESS, *args], capture_output=True, text=True, timeout=300
    )


def test_run_reports_equivalence_as_json():
    proc = run_harness("run", "--rules", "nsmallest", "--seeds", "2", "--rows", "60",
                       "--report", "json")
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["seeds"] == 2 and report["rows"] == 60
    assert report["equal"] is True
    assert set(report["rules"]) == {"nsmallest"}
    for entry in report["rules"]["nsmallest"].values():
        assert entry["equal"] == 2


def test_run_can_stay_quiet():
    proc = run_harness("run", "--rules", "nsmallest", "--seeds", "1", "--rows", "40",
                       "--report", "none")
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == ""


def test_unknown_rule_is_a_usage_error():
    proc = run_harness("run", "--rules", "nsmallest,bogus", "--seeds", "1", "--rows", "40")
    assert proc.returncode == 2
    assert "bogus" in proc.stderr


def test_time_reports_speedups():
    proc = run_harness("time", "--rules", "concat-lists", "--rows", "2000",
                       "--trials", "2", "--report", "json")
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["rows"] == 2000 and report["trials"] == 2
    timing = report["rules"]["concat-lists"]
    assert timing["speedup"] > 0
    assert timing["original_s"] > 0 and timing["rewritten_s"] > 0


def test_missing_subcommand_is_a_usage_error():
    proc = run_harness()
    assert proc.returncode == 2


def test_broken_engine_is_reported():
    proc = run_harness("run", "--rules", "nsmallest", "--seeds", "1", "--rows", "40",
                       "--engine", "/bin/false")
    assert proc.returncode == 2
    assert "engine" in proc.stderr.lower()
