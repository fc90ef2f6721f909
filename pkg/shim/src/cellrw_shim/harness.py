"""Equivalence and timing harness for the builtin rules.

Every case runs the same experiment: build two identically seeded namespaces,
execute the original cell in one and the engine's rewrite in the other, then
compare what the executions left behind.  Comparison is exact for everything
but floats, which get a relative tolerance: vectorized arithmetic may round
in a different order than the scalar loop it replaces.  A null is a null
regardless of flavor (None and NaN compare equal to each other).
"""

from __future__ import annotations

import ast
import hashlib
import linecache
import math
import statistics
import string
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .engine import DEFAULT_ENGINE, EngineResult, invoke

REL_TOL = 1e-12

RULE_IDS = (
    "nsmallest",
    "concat-lists",
    "str-split-loop",
    "apply-direct",
    "apply-select",
    "substr-contains",
)


class HarnessError(RuntimeError):
    """The experiment itself is broken: engine refused, case misconfigured."""


# ---------------------------------------------------------------------------
# data generation


@dataclass(frozen=True)
class GeneratorSpec:
    """Deterministic recipe for one namespace: a frame plus loose bindings.

    columns maps names to value kinds:
      float          standard normal draws, scaled to roughly -300..300
      float-unique   strictly increasing draws, shuffled (no ties)
      int            draws from 0..999
      int-unique     a permutation of the row numbers
      posint         draws from 1..999
      word           short words over the alphabet
      split:<d>      words joined by 0-2 occurrences of the delimiter <d>
      split01:<d>    like split:<d> but at most one occurrence, mostly none
      needle:<s>     words, roughly half containing the substring <s>
    bindings adds loose values: float, posfloat, int, wordlist, or
    sample:<col> (a few distinct values drawn from that frame column).
    null_rate blanks that fraction of entries in float and word-ish columns.
    Everything is derived from one generator seeded with ``seed``.
    """

    rows: int
    columns: tuple[tuple[str, str], ...]
    bindings: tuple[tuple[str, str], ...] = ()
    null_rate: float = 0.0
    alphabet: str = string.ascii_lowercase
    index: str = "range"
    seed: int = 0


def _word_pool(rng: np.random.Generator, alphabet: str, count: int = 97) -> list:
    letters = list(alphabet)
    return [
        "".join(rng.choice(letters, size=rng.integers(3, 9)))
        for _ in range(count)
    ]


def _pick(rng: np.random.Generator, pool: list, rows: int) -> list:
    idx = rng.integers(0, len(pool), size=rows)
    return [pool[i] for i in idx]


def _inject_nulls(rng: np.random.Generator, values: list, rate: float, null) -> list:
    mask = rng.random(len(values)) < rate
    return [null if hit else v for v, hit in zip(values, mask)]


def _column(rng: np.random.Generator, kind: str, spec: GeneratorSpec) -> pd.Series:
    rows, rate = spec.rows, spec.null_rate
    if kind == "float":
        vals = rng.normal(0.0, 100.0, rows)
        if rate:
            vals[rng.random(rows) < rate] = np.nan
        return pd.Series(vals, dtype="float64")
    if kind == "float-unique":
        vals = np.cumsum(rng.random(rows) + 1e-9)
        rng.shuffle(vals)
        return pd.Series(vals, dtype="float64")
    if kind == "int":
        return pd.Series(rng.integers(0, 1000, rows), dtype="int64")
    if kind == "int-unique":
        return pd.Series(rng.permutation(rows), dtype="int64")
    if kind == "posint":
        return pd.Series(rng.integers(1, 1000, rows), dtype="int64")
    if kind == "word":
        values = _pick(rng, _word_pool(rng, spec.alphabet), rows)
    elif kind.startswith("split:") or kind.startswith("split01:"):
        delim = kind.split(":", 1)[1]
        counts = (0, 1, 2) if kind.startswith("split:") else (0, 0, 1)
        words = _word_pool(rng, spec.alphabet)
        pool = [
            delim.join(_pick(rng, words, int(rng.choice(counts)) + 1))
            for _ in range(97)
        ]
        values = _pick(rng, pool, rows)
    elif kind.startswith("needle:"):
        needle = kind.split(":", 1)[1]
        words = _word_pool(rng, spec.alphabet)
        pool = [
            w + needle + v if flip else w + v
            for w, v, flip in zip(words, reversed(words), rng.random(97) < 0.5)
        ]
        values = _pick(rng, pool, rows)
    else:
        raise ValueError(f"unknown column kind: {kind!r}")
    if rate:
        values = _inject_nulls(rng, values, rate, None)
    return pd.Series(values, dtype="object")


def _binding(rng: np.random.Generator, kind: str, spec: GeneratorSpec, df: pd.DataFrame):
    if kind == "float":
        return float(rng.normal(0.0, 10.0))
    if kind == "posfloat":
        return float(rng.uniform(1.0, 100.0))
    if kind == "int":
        return int(rng.integers(0, 100))
    if kind == "wordlist":
        return _word_pool(rng, spec.alphabet, count=8)
    if kind.startswith("sample:"):
        col = kind.split(":", 1)[1]
        return list(dict.fromkeys(df[col].dropna().tolist()))[:6]
    raise ValueError(f"unknown binding kind: {kind!r}")


def materialize(spec: GeneratorSpec) -> dict:
    """Build the namespace the spec describes: pd, np, df, and bindings."""
    rng = np.random.default_rng(spec.seed)
    df = pd.DataFrame({name: _column(rng, kind, spec) for name, kind in spec.columns})
    if spec.index == "shuffled":
        df.index = pd.Index(rng.permutation(spec.rows))
    ns = {"pd": pd, "np": np, "df": df}
    for name, kind in spec.bindings:
        ns[name] = _binding(rng, kind, spec, df)
    return ns


# ---------------------------------------------------------------------------
# cell execution


@dataclass
class CellRun:
    """What one cell execution left behind."""

    value: object = None
    has_value: bool = False
    error: BaseException | None = None


def run_cell(source: str, ns: dict, *, tag: str = "cell") -> CellRun:
    """Execute source in ns the way a notebook would.

    The trailing expression statement, if any, becomes the displayed value.
    The source is registered with linecache first: deferred guards re-read
    their subject function's source at runtime, exactly as they can in a
    live kernel.
    """
    digest = hashlib.sha1(source.encode()).hexdigest()[:12]
    filename = f"<cellrw-{tag}-{digest}>"
    linecache.cache[filename] = (
        len(source),
        None,
        source.splitlines(keepends=True),
        filename,
    )
    try:
        tree = ast.parse(source)
        tail = None
        if tree.body and isinstance(tree.body[-1], ast.Expr):
            tail = ast.Expression(tree.body.pop().value)
        exec(compile(tree, filename, "exec"), ns)
        if tail is not None:
            return CellRun(value=eval(compile(tail, filename, "eval"), ns), has_value=True)
        return CellRun()
    except Exception as exc:  # the verdict compares failures, it must not hide them
        return CellRun(error=exc)


# ---------------------------------------------------------------------------
# comparison


def compare_values(a, b, flags: frozenset = frozenset(), label: str = "value") -> str | None:
    """First difference between two results, or None if equivalent.

    flags relax declared divergences: "index" skips index comparison,
    "dtype" skips dtype comparison, "name" skips series-name comparison.
    """
    if isinstance(a, pd.DataFrame) or isinstance(b, pd.DataFrame):
        if not (isinstance(a, pd.DataFrame) and isinstance(b, pd.DataFrame)):
            return f"{label}: {type(a).__name__} vs {type(b).__name__}"
        if list(a.columns) != list(b.columns):
            return f"{label}: columns {list(a.columns)} vs {list(b.columns)}"
        for col in a.columns:
            found = compare_values(a[col], b[col], flags, f"{label}[{col!r}]")
            if found:
                return found
        return None
    if isinstance(a, pd.Series) or isinstance(b, pd.Series):
        if not (isinstance(a, pd.Series) and isinstance(b, pd.Series)):
            return f"{label}: {type(a).__name__} vs {type(b).__name__}"
        if len(a) != len(b):
            return f"{label}: length {len(a)} vs {len(b)}"
        if "index" not in flags and not a.index.equals(b.index):
            return f"{label}: index differs"
        if "dtype" not in flags and str(a.dtype) != str(b.dtype):
            return f"{label}: dtype {a.dtype} vs {b.dtype}"
        if "name" not in flags and a.name != b.name:
            return f"{label}: name {a.name!r} vs {b.name!r}"
        for i, (x, y) in enumerate(zip(a.tolist(), b.tolist())):
            found = compare_values(x, y, flags, f"{label}[{i}]")
            if found:
                return found
        return None
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        if not (isinstance(a, np.ndarray) and isinstance(b, np.ndarray)):
            return f"{label}: {type(a).__name__} vs {type(b).__name__}"
        if a.shape != b.shape:
            return f"{label}: shape {a.shape} vs {b.shape}"
        for i, (x, y) in enumerate(zip(a.tolist(), b.tolist())):
            found = compare_values(x, y, flags, f"{label}[{i}]")
            if found:
                return found
        return None
    try:
        a_null, b_null = bool(pd.isna(a)), bool(pd.isna(b))
    except (TypeError, ValueError):
        a_null = b_null = False
    if a_null or b_null:
        return None if (a_null and b_null) else f"{label}: {a!r} vs {b!r}"
    if isinstance(a, (bool, np.bool_)) or isinstance(b, (bool, np.bool_)):
        return None if bool(a) == bool(b) else f"{label}: {a!r} vs {b!r}"
    if isinstance(a, (float, np.floating)) or isinstance(b, (float, np.floating)):
        if not isinstance(a, (int, float, np.integer, np.floating)):
            return f"{label}: {a!r} vs {b!r}"
        if not isinstance(b, (int, float, np.integer, np.floating)):
            return f"{label}: {a!r} vs {b!r}"
        if math.isclose(float(a), float(b), rel_tol=REL_TOL, abs_tol=0.0):
            return None
        return f"{label}: {a!r} vs {b!r}"
    try:
        equal = bool(a == b)
    except (TypeError, ValueError):
        return f"{label}: incomparable {type(a).__name__} vs {type(b).__name__}"
    return None if equal else f"{label}: {a!r} vs {b!r}"


# ---------------------------------------------------------------------------
# equivalence cases


@dataclass(frozen=True)
class EquivalenceCase:
    """One seeded experiment: a cell, its data recipe, what to compare."""

    rule_id: str
    cell: str
    generator: GeneratorSpec
    history: str = ""
    setup: str = ""
    probes: tuple[str, ...] = ()
    divergence: frozenset = frozenset()


@dataclass(frozen=True)
class Verdict:
    equal: bool
    detail: str = ""


_rewrite_cache: dict = {}


def rewrite_case(case: EquivalenceCase, *, engine: tuple[str, ...] = DEFAULT_ENGINE) -> EngineResult:
    """Engine output for the case cell, cached per distinct (cell, history)."""
    key = (engine, case.cell, case.history)
    hit = _rewrite_cache.get(key)
    if hit is not None:
        return hit
    history_path = None
    try:
        if case.history:
            fd = tempfile.NamedTemporaryFile(
                "w", suffix=".py", prefix="cellrw-case-", delete=False, encoding="utf-8"
            )
            with fd:
                fd.write(case.history)
            history_path = fd.name
        result = invoke(case.cell, engine=engine, history_path=history_path, timeout=30.0)
    finally:
        if history_path:
            Path(history_path).unlink(missing_ok=True)
    matched = [m.get("rule") for m in result.report.get("matches", [])]
    if result.report.get("outcome") != "rewritten" or case.rule_id not in matched:
        raise HarnessError(
            f"{case.rule_id}: engine did not rewrite the case cell "
            f"(outcome={result.report.get('outcome')!r}, matches={matched})"
        )
    _rewrite_cache[key] = result
    return result


def check_equivalence(case: EquivalenceCase, *, engine: tuple[str, ...] = DEFAULT_ENGINE) -> Verdict:
    """Run original and rewritten cells on identical data and compare."""
    result = rewrite_case(case, engine=engine)
    ns_orig = materialize(case.generator)
    ns_fast = materialize(case.generator)
    if case.setup:
        for ns in (ns_orig, ns_fast):
            prep = run_cell(case.setup, ns, tag="setup")
            if prep.error is not None:
                raise HarnessError(f"{case.rule_id}: setup failed: {prep.error!r}")
    left = run_cell(case.cell, ns_orig, tag="orig")
    right = run_cell(result.source, ns_fast, tag="fast")
    if left.error is not None or right.error is not None:
        if type(left.error) is type(right.error):
            return Verdict(True, f"both raised {type(left.error).__name__}")
        return Verdict(
            False,
            "original raised {}, rewritten raised {}".format(
                type(left.error).__name__ if left.error else "nothing",
                type(right.error).__name__ if right.error else "nothing",
            ),
        )
    if left.has_value != right.has_value:
        return Verdict(False, "one side displayed a value, the other did not")
    if left.has_value:
        found = compare_values(left.value, right.value, case.divergence, "displayed value")
        if found:
            return Verdict(False, found)
    for name in case.probes:
        if name not in ns_orig or name not in ns_fast:
            return Verdict(False, f"probe {name!r} missing after execution")
        found = compare_values(ns_orig[name], ns_fast[name], case.divergence, name)
        if found:
            return Verdict(False, found)
    return Verdict(True)


# ---------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingPair:
    rule_id: str
    original_s: float
    rewritten_s: float

    @property
    def speedup(self) -> float:
        return self.original_s / self.rewritten_s if self.rewritten_s > 0 else math.inf


def time_pair(
    case: EquivalenceCase,
    *,
    rows: int,
    trials: int,
    engine: tuple[str, ...] = DEFAULT_ENGINE,
) -> TimingPair:
    """Median wall time of each side at the given scale.

    The rewrite itself happens once, outside the clock: rewriting cost is the
    engine's own latency budget, measured elsewhere.
    """
    spec = replace(case.generator, rows=rows)
    result = rewrite_case(case, engine=engine)

    def side(source: str, tag: str) -> float:
        ns = materialize(spec)
        if case.setup:
            prep = run_cell(case.setup, ns, tag="setup")
            if prep.error is not None:
                raise HarnessError(f"{case.rule_id}: setup failed: {prep.error!r}")
        ticks = []
        for _ in range(trials):
            start = time.perf_counter()
            out = run_cell(source, ns, tag=tag)
            ticks.append(time.perf_counter() - start)
            if out.error is not None:
                raise HarnessError(f"{case.rule_id}: timed cell raised {out.error!r}")
        return statistics.median(ticks)

    return TimingPair(case.rule_id, side(case.cell, "orig"), side(result.source, "fast"))


# ---------------------------------------------------------------------------
# the case catalog


@dataclass(frozen=True)
class CaseFamily:
    """A case template: fixed cell and recipe, seed varied per run.

    fallback marks precondition-violation fixtures whose runtime guard must
    reject and take the original path; timed marks the family used for the
    rule's speedup measurement; rows_locked pins the recipe's row count as
    part of the fixture (empty-input cases).
    """

    name: str
    rule_id: str
    cell: str
    generator: GeneratorSpec
    history: str = ""
    setup: str = ""
    probes: tuple[str, ...] = ()
    divergence: frozenset = frozenset()
    fallback: bool = False
    timed: bool = False
    rows_locked: bool = False

    def case(self, seed: int, rows: int | None = None) -> EquivalenceCase:
        spec = replace(self.generator, seed=seed)
        if rows is not None and not self.rows_locked:
            spec = replace(spec, rows=rows)
        return EquivalenceCase(
            rule_id=self.rule_id,
            cell=self.cell,
            generator=spec,
            history=self.history,
            setup=self.setup,
            probes=self.probes,
            divergence=self.divergence,
        )


_RATING_CELL = """\
def weighted_rating(x, m=m, C=C):
    v = x['vote_count']
    R = x['vote_average']
    return v / (v + m) * R + m / (m + v) * C

scores = df.apply(weighted_rating, axis=1)
"""

_MARGIN_CELL = """\
def margin(row):
    r = row['revenue']
    c = row['cost']
    u = row['units']
    return (r - c) / u

df.apply(margin, axis=1)
"""

_BUCKET_CELL = """\
def bucket(row):
    if row['a'] > 50:
        return 'high'
    elif row['b'] > row['a']:
        return 'crossed'
    else:
        return 'low'

labels = df.apply(bucket, axis=1)
"""

_TAG_CELL = """\
def tag(row):
    if row['kind'].startswith('a'):
        return 'alpha'
    elif row['kind'] in watchlist:
        return 'watch'
    else:
        return 'rest'

verdicts = df.apply(tag, axis=1)
"""

_GAP_HISTORY = """\
def rating_gap(x):
    a = x['a']
    b = x['b']
    return a - b
"""

_GAP_SETUP = """\
def rating_gap(x):
    a = x['a']
    b = x['b']
    return a * b
"""


def families() -> tuple[CaseFamily, ...]:
    """The case catalog: clean sweeps plus precondition-violation fixtures."""
    return (
        CaseFamily(
            name="nsmallest-series",
            rule_id="nsmallest",
            cell="smallest = df['A'].sort_values().head(n=5)\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "float-unique"),)),
            probes=("smallest",),
            timed=True,
        ),
        CaseFamily(
            name="nsmallest-display",
            rule_id="nsmallest",
            cell="df['A'].sort_values().head(12)\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "int-unique"),)),
        ),
        CaseFamily(
            name="nsmallest-object",
            rule_id="nsmallest",
            cell="smallest = df['A'].sort_values().head(n=5)\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "word"),)),
            probes=("smallest",),
            fallback=True,
        ),
        CaseFamily(
            name="concat-floats",
            rule_id="concat-lists",
            cell="combined = pd.Series(df['A'].tolist() + df['B'].tolist())\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "float"), ("B", "float"))),
            probes=("combined",),
            timed=True,
        ),
        CaseFamily(
            name="concat-ints",
            rule_id="concat-lists",
            cell="combined = pd.Series(df['A'].tolist() + df['B'].tolist())\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "int"), ("B", "int"))),
            probes=("combined",),
        ),
        CaseFamily(
            # the constructor drops the input's name, concat keeps a shared one
            name="concat-shared-name",
            rule_id="concat-lists",
            cell="combined = pd.Series(df['A'].tolist() + df['A'].tolist())\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "float"),)),
            probes=("combined",),
            divergence=frozenset({"name"}),
        ),
        CaseFamily(
            name="concat-dtype-mix",
            rule_id="concat-lists",
            cell="combined = pd.Series(df['A'].tolist() + df['B'].tolist())\n",
            generator=GeneratorSpec(rows=250, columns=(("A", "float"), ("B", "int"))),
            probes=("combined",),
            fallback=True,
        ),
        CaseFamily(
            name="concat-empty",
            rule_id="concat-lists",
            cell="combined = pd.Series(df['A'].tolist() + df['B'].tolist())\n",
            generator=GeneratorSpec(rows=0, columns=(("A", "float"), ("B", "float"))),
            probes=("combined",),
            fallback=True,
            rows_locked=True,
        ),
        CaseFamily(
            name="split-columns",
            rule_id="str-split-loop",
            cell="df[['first', 'rest']] = df['C'].str.split('-', n=1, expand=True)\n",
            generator=GeneratorSpec(rows=250, columns=(("C", "split:-"),)),
            probes=("df",),
            timed=True,
        ),
        CaseFamily(
            # rows mostly without the delimiter: the missing-part column is null
            name="split-sparse",
            rule_id="str-split-loop",
            cell="df[['first', 'rest']] = df['C'].str.split('-', n=1, expand=True)\n",
            generator=GeneratorSpec(rows=250, columns=(("C", "split01:-"),)),
            probes=("df",),
        ),
        CaseFamily(
            name="split-nulls",
            rule_id="str-split-loop",
            cell="df[['first', 'rest']] = df['C'].str.split('-', n=1, expand=True)\n",
            generator=GeneratorSpec(rows=250, columns=(("C", "split:-"),), null_rate=0.15),
            probes=("df",),
            fallback=True,
        ),
        CaseFamily(
            name="apply-direct-ratings",
            rule_id="apply-direct",
            cell=_RATING_CELL,
            generator=GeneratorSpec(
                rows=250,
                columns=(("vote_count", "posint"), ("vote_average", "float")),
                bindings=(("m", "posfloat"), ("C", "float")),
            ),
            probes=("scores",),
            timed=True,
        ),
        CaseFamily(
            name="apply-direct-display",
            rule_id="apply-direct",
            cell=_MARGIN_CELL,
            generator=GeneratorSpec(
                rows=250,
                columns=(("revenue", "float"), ("cost", "float"), ("units", "posint")),
                index="shuffled",
            ),
        ),
        CaseFamily(
            name="apply-direct-redefined",
            rule_id="apply-direct",
            cell="gap = df.apply(rating_gap, axis=1)\n",
            generator=GeneratorSpec(rows=250, columns=(("a", "float"), ("b", "float"))),
            history=_GAP_HISTORY,
            setup=_GAP_SETUP,
            probes=("gap",),
            fallback=True,
        ),
        CaseFamily(
            name="select-numeric",
            rule_id="apply-select",
            cell=_BUCKET_CELL,
            generator=GeneratorSpec(rows=250, columns=(("a", "float"), ("b", "float"))),
            probes=("labels",),
            timed=True,
        ),
        CaseFamily(
            name="select-strings",
            rule_id="apply-select",
            cell=_TAG_CELL,
            generator=GeneratorSpec(
                rows=250,
                columns=(("kind", "word"),),
                bindings=(("watchlist", "sample:kind"),),
                index="shuffled",
            ),
            probes=("verdicts",),
        ),
        CaseFamily(
            name="select-empty",
            rule_id="apply-select",
            cell=_BUCKET_CELL,
            generator=GeneratorSpec(rows=0, columns=(("a", "float"), ("b", "float"))),
            probes=("labels",),
            fallback=True,
            rows_locked=True,
        ),
        CaseFamily(
            name="substr-titles",
            rule_id="substr-contains",
            cell="hits = df['title'].apply(lambda t: 'star' in t)\n",
            generator=GeneratorSpec(rows=250, columns=(("title", "needle:star"),)),
            probes=("hits",),
            timed=True,
        ),
        CaseFamily(
            name="substr-display",
            rule_id="substr-contains",
            cell="df['name'].apply(lambda s: 'ab' in s)\n",
            generator=GeneratorSpec(rows=250, columns=(("name", "word"),)),
        ),
        CaseFamily(
            # nulls reject the vectorized form; containment on None then raises
            # identically on both sides
            name="substr-nulls",
            rule_id="substr-contains",
            cell="hits = df['title'].apply(lambda t: 'star' in t)\n",
            generator=GeneratorSpec(
                rows=250, columns=(("title", "needle:star"),), null_rate=0.1
            ),
            fallback=True,
        ),
    )


def timed_family(rule_id: str) -> CaseFamily:
    for fam in families():
        if fam.rule_id == rule_id and fam.timed:
            return fam
    raise ValueError(f"no timed family for rule {rule_id!r}")


# ---------------------------------------------------------------------------
# sweeps


def run_sweep(
    rule_ids: tuple[str, ...] = RULE_IDS,
    *,
    seeds: int,
    rows: int,
    engine: tuple[str, ...] = DEFAULT_ENGINE,
) -> dict:
    """Equivalence verdicts for every family of the selected rules."""
    unknown = [r for r in rule_ids if r not in RULE_IDS]
    if unknown:
        raise ValueError(f"unknown rules: {', '.join(unknown)}")
    report: dict = {"seeds": seeds, "rows": rows, "rules": {}}
    for fam in families():
        if fam.rule_id not in rule_ids:
            continue
        entry = {"cases": 0, "equal": 0, "divergent": []}
        for seed in range(seeds):
            verdict = check_equivalence(fam.case(seed, rows), engine=engine)
            entry["cases"] += 1
            if verdict.equal:
                entry["equal"] += 1
            else:
                entry["divergent"].append({"seed": seed, "detail": verdict.detail})
        report["rules"].setdefault(fam.rule_id, {})[fam.name] = entry
    report["equal"] = all(
        fam["equal"] == fam["cases"]
        for rule in report["rules"].values()
        for fam in rule.values()
    )
    return report


def run_timings(
    rule_ids: tuple[str, ...] = RULE_IDS,
    *,
    rows: int,
    trials: int,
    engine: tuple[str, ...] = DEFAULT_ENGINE,
) -> dict:
    """Original-vs-rewritten timings for each rule's timed family."""
    unknown = [r for r in rule_ids if r not in RULE_IDS]
    if unknown:
        raise ValueError(f"unknown rules: {', '.join(unknown)}")
    report: dict = {"rows": rows, "trials": trials, "rules": {}}
    for rule_id in rule_ids:
        pair = time_pair(timed_family(rule_id).case(0), rows=rows, trials=trials, engine=engine)
        report["rules"][rule_id] = {
            "original_s": pair.original_s,
            "rewritten_s": pair.rewritten_s,
            "speedup": pair.speedup,
        }
    return report
