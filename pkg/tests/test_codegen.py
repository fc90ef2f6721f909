import ast

import pytest

from cellrw.codegen import (
    ColumnMathOnly,
    IfElseVectorizable,
    InternalInvariantError,
    SubstringSearch,
    Unknown,
    Untranslatable,
    assigned_names,
    classify_function,
    guard_region_is_pure,
    plan_rewrite,
    resolve_function,
    source_digest,
    vectorize_condition,
)
from cellrw.patterns import ResolutionScope, scan_cell
from cellrw.syntax import FreshNamePool, harvest_identifiers, parse_cell, structurally_equal


def fn_def(src: str) -> ast.FunctionDef:
    node = ast.parse(src).body[0]
    assert isinstance(node, ast.FunctionDef)
    return node


def lam(src: str) -> ast.Lambda:
    node = ast.parse(src, mode="eval").body
    assert isinstance(node, ast.Lambda)
    return node


def plan_for(src: str, registry, history: str = ""):
    cell = parse_cell(src)
    matches = scan_cell(cell, registry, history=history)
    assert matches, "expected a match"
    pool = FreshNamePool(harvest_identifiers(src) | harvest_identifiers(history))
    return plan_rewrite(matches[0], pool)


WEIGHTED = """\
def weighted_rating(x, m=m, C=C):
    v = x['vote_count']
    R = x['vote_average']
    return (v/(v+m) * R) + (m/(m+v) * C)
"""

CHAIN = """\
def foo(row):
    if row['A'] == row['B'] and row['A'] < row['C']:
        return 'X'
    elif row['A'].startswith('Y'):
        return 'Y'
    elif row['B'] in ls:
        return 'Z'
    else:
        return 'NA'
"""


# --- classification -----------------------------------------------------------

def test_column_math_classification():
    got = classify_function(fn_def(WEIGHTED))
    assert isinstance(got, ColumnMathOnly)
    assert got.row_param == "x"
    assert got.extractions == (("v", "vote_count"), ("R", "vote_average"))


def test_column_math_tolerates_docstring():
    src = ("def f(row):\n    \"\"\"Weighted mean.\"\"\"\n"
           "    a = row['A']\n    return a * 2\n")
    assert isinstance(classify_function(fn_def(src)), ColumnMathOnly)


def test_column_math_rejects_direct_subscript_in_return():
    src = "def f(row):\n    return row['A'] + 1\n"
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_column_math_rejects_calls():
    src = "def f(row):\n    a = row['A']\n    return helper(a)\n"
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_column_math_rejects_undefaulted_extra_param():
    src = "def f(row, scale):\n    a = row['A']\n    return a * scale\n"
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_column_math_rejects_annotations():
    src = "def f(row: dict):\n    a = row['A']\n    return a + 1\n"
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_if_chain_classification():
    got = classify_function(fn_def(CHAIN))
    assert isinstance(got, IfElseVectorizable)
    assert got.row_param == "row"
    assert len(got.branches) == 3
    assert [v.value for _, v in got.branches] == ["X", "Y", "Z"]
    assert got.default.value == "NA"


def test_if_chain_requires_trailing_else():
    src = ("def f(row):\n    if row['A'] > 0:\n        return 'pos'\n"
           "    return 'neg'\n")
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_if_chain_requires_constant_returns():
    src = ("def f(row):\n    if row['A'] > 0:\n        return bar(row['A'])\n"
           "    else:\n        return 'neg'\n")
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_if_chain_requires_vectorizable_conditions():
    src = ("def f(row):\n    if bar():\n        return 'a'\n"
           "    else:\n        return 'b'\n")
    assert isinstance(classify_function(fn_def(src)), Unknown)


def test_lambda_substring_classification():
    got = classify_function(lam("lambda x: 'needle' in x"))
    assert got == SubstringSearch(param="x", needle="needle")


def test_lambda_substring_rejects_other_bodies():
    assert isinstance(classify_function(lam("lambda x: 'a' in y")), Unknown)
    assert isinstance(classify_function(lam("lambda x: x + 1")), Unknown)
    assert isinstance(classify_function(lam("lambda x, y: 'a' in x")), Unknown)


# --- condition vectorization ----------------------------------------------------

FRAME = ast.Name(id="df", ctx=ast.Load())


def vec(cond_src: str):
    cond = ast.parse(cond_src, mode="eval").body
    return vectorize_condition(cond, "row", FRAME)


def expect(expr_src: str):
    return ast.parse(expr_src, mode="eval").body


@pytest.mark.parametrize("cond, want", [
    ("row['A'] == row['B']", "df['A'] == df['B']"),
    ("row['A'] != 3", "df['A'] != 3"),
    ("row['A'] < row['C'] and row['B'] >= k", "(df['A'] < df['C']) & (df['B'] >= k)"),
    ("row['A'] > 0 or row['B'] <= 0", "(df['A'] > 0) | (df['B'] <= 0)"),
    ("not row['A'] == row['B']", "~(df['A'] == df['B'])"),
    ("row['B'] in ls", "df['B'].isin(ls)"),
    ("row['B'] in [1, 2, 3]", "df['B'].isin([1, 2, 3])"),
    ("row['A'].startswith('Y')", "df['A'].str.startswith('Y')"),
    ("row['A'] == row['B'] and row['B'] == row['C'] and row['A'] > 0",
     "((df['A'] == df['B']) & (df['B'] == df['C'])) & (df['A'] > 0)"),
])
def test_vectorize_condition_table(cond, want):
    assert structurally_equal(vec(cond), expect(want))


@pytest.mark.parametrize("cond", [
    "1 < 2",                      # no row-derived operand
    "k in ls",                    # containment subject not row-derived
    "row['B'] in 'abc'",          # substring test, not membership
    "row['B'] in 3",              # not list-like
    "row['A'] == row['B'] == row['C']",  # chained comparison
    "bar(row['A'])",              # arbitrary call
    "row['A'].endswith('Y')",     # only startswith is tabled
    "row[key] > 0",               # non-constant column key
    "row['A']",                   # bare truthiness
])
def test_vectorize_condition_rejects(cond):
    with pytest.raises(Untranslatable):
        vec(cond)


# --- digests and resolution -----------------------------------------------------

def test_source_digest_ignores_comments_and_spacing():
    a = fn_def("def f(row):\n    a = row['A']\n    return a + 1\n")
    b = fn_def("def f(row):\n    # pull the column\n    a  =  row['A']\n    return (a + 1)\n")
    c = fn_def("def f(row):\n    a = row['A']\n    return a + 2\n")
    assert source_digest(a) == source_digest(b)
    assert source_digest(a) != source_digest(c)


def _scope(cell_src: str, history: str, top_index: int) -> ResolutionScope:
    return ResolutionScope(parse_cell(cell_src), history, top_index)


def test_resolve_prefers_cell_definition_over_history():
    cell = "def f(row):\n    return 1\n\nx = 1\n"
    history = "def f(row):\n    return 2\n"
    got = resolve_function("f", _scope(cell, history, 1))
    assert got is not None
    assert got.body[0].value.value == 1


def test_resolve_ignores_definitions_after_the_window():
    cell = "x = 1\ndef f(row):\n    return 1\n"
    got = resolve_function("f", _scope(cell, "", 0))
    assert got is None


def test_resolve_latest_history_definition_wins():
    history = "def f(row):\n    return 1\ndef f(row):\n    return 2\n"
    got = resolve_function("f", _scope("x = 1\n", history, 0))
    assert got.body[0].value.value == 2


def test_resolve_skips_decorated_definitions():
    cell = "@memo\ndef f(row):\n    return 1\n\nx = 1\n"
    assert resolve_function("f", _scope(cell, "", 1)) is None


def test_resolve_scans_unparseable_history_for_def_blocks():
    history = "%load_ext thing\ndef f(row):\n    a = row['A']\n    return a + 1\n%matplotlib inline\n"
    got = resolve_function("f", _scope("x = 1\n", history, 0))
    assert got is not None
    assert isinstance(classify_function(got), ColumnMathOnly)


def test_resolve_missing_name_returns_none():
    assert resolve_function("ghost", _scope("x = 1\n", "y = 2\n", 0)) is None


# --- plans ----------------------------------------------------------------------

def test_plan_hoists_guarded_receiver(registry):
    plan = plan_for("df['A'].sort_values().head(5)\n", registry)
    assert plan.rule_id == "nsmallest"
    (temp, expr), = plan.hoisted
    assert temp.startswith("__cellrw_")
    assert ast.unparse(expr) == "df['A']"
    assert "isinstance" in plan.guard_text()


def test_plan_assign_shell_reuses_targets(registry):
    plan = plan_for("top = df['A'].sort_values().head(5)\n", registry)
    then, fallback = plan.branches
    assert assigned_names(then) == {"top"}
    assert assigned_names(fallback) == {"top"}


def test_plan_expression_shell_echoes_result(registry):
    plan = plan_for("df['A'].sort_values().head(5)\n", registry)
    last = plan.replacement[-1]
    assert isinstance(last, ast.Expr)
    assert isinstance(last.value, ast.Name)
    assert last.value.id.startswith("__cellrw_")


def test_plan_fallback_shows_normalized_call(registry):
    plan = plan_for("a, b = df['C'].str.split('(', 1, expand=True)\n", registry)
    _, fallback = plan.branches
    assert "split('(', n=1, expand=True)" in ast.unparse(fallback[0])


def test_plan_branches_bind_same_names(registry):
    plan = plan_for("df[['a', 'b']] = df['C'].str.split('(', 1, expand=True)\n", registry)
    then, fallback = plan.branches
    assert assigned_names(then) == assigned_names(fallback) == {"df"}


def test_plan_loop_locals_are_fresh(registry):
    src = "ls = [1]\nit = 2\nspl = 3\na, b = df['C'].str.split('(', 1, expand=True)\n"
    plan = plan_for(src, registry)
    then, _ = plan.branches
    names = assigned_names(then, keep_sentinels=True)
    assert {"ls", "it", "spl"}.isdisjoint(names - {"a", "b"})


def test_plan_deferred_guard_is_exception_safe(registry):
    history = WEIGHTED
    plan = plan_for("df.apply(weighted_rating, axis=1)\n", registry, history)
    assert plan.rule_id == "apply-direct"
    guard_block = "\n".join(ast.unparse(s) for s in plan.guard_stmts)
    assert "try:" in guard_block
    assert "except Exception:" in guard_block
    assert "sha256" in guard_block
    assert "getsource(weighted_rating)" in guard_block
    fn = fn_def(WEIGHTED)
    assert source_digest(fn) in guard_block


def test_plan_select_emits_conditions_choices_and_index(registry):
    plan = plan_for("df.apply(foo, axis=1)\n", registry, CHAIN)
    assert plan.rule_id == "apply-select"
    then, _ = plan.branches
    text = "\n".join(ast.unparse(s) for s in then)
    assert "np.select" in text
    assert "index=" in text
    assert ".str.startswith('Y')" in text
    assert ".isin(ls)" in text
    assert "len" in plan.guard_text()


def test_plan_guard_region_is_pure(registry):
    for src, history in [
        ("df['A'].sort_values().head(5)\n", ""),
        ("pd.Series(x.tolist() + y.tolist())\n", ""),
        ("df.apply(weighted_rating, axis=1)\n", WEIGHTED),
        ("df.apply(foo, axis=1)\n", CHAIN),
    ]:
        plan = plan_for(src, registry, history)
        assert guard_region_is_pure(plan)


def test_plan_allows_hoisted_expression_recurring_in_target(registry):
    plan = plan_for("df[ser.idxmax()] = ser.sort_values().head(5)\n", registry)
    then, fallback = plan.branches
    assert "df[ser.idxmax()]" in ast.unparse(then[0])
    assert "df[ser.idxmax()]" in ast.unparse(fallback[0])


def test_plan_validation_is_invoked(registry, monkeypatch):
    import cellrw.codegen as cg

    calls = []
    original = cg.validate_plan

    def spy(plan):
        calls.append(plan)
        return original(plan)

    monkeypatch.setattr(cg, "validate_plan", spy)
    plan_for("df['A'].sort_values().head(5)\n", registry)
    assert calls


# --- assigned_names helper --------------------------------------------------------

def test_assigned_names_covers_binding_forms():
    stmts = ast.parse(
        "a = 1\n"
        "b += 1\n"
        "c: int = 2\n"
        "for d in xs:\n    pass\n"
        "e[0] = 1\n"
        "f.attr = 1\n"
        "import g\n"
        "def h():\n    pass\n"
        "(i := 3)\n"
        "with open('x') as j:\n    pass\n"
    ).body
    got = assigned_names(stmts)
    assert got == {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}


def test_assigned_names_hides_sentinels_by_default():
    stmts = ast.parse("__cellrw_res = 1\nx = 2\n").body
    assert assigned_names(stmts) == {"x"}
    assert assigned_names(stmts, keep_sentinels=True) == {"__cellrw_res", "x"}
