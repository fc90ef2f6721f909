"""The built-in rewrite rules.

Six rules ship, in fixed priority order: nsmallest, concat-lists,
str-split-loop, apply-direct, apply-select, substr-contains.  Identifiers here
are public: the CLI's --rules/--disable flags and report entries use them.

Replacement templates and guards assume the conventional aliases ``pd`` and
``np`` for pandas and numpy wherever the subject itself does not supply the
module name (rule 2 reuses whatever name the matched constructor call used).
"""

from __future__ import annotations

import ast

from .codegen import (
    ColumnMathOnly,
    IfElseVectorizable,
    make_apply_analyzer,
    synthesize_direct_call,
    synthesize_select,
)
from .patterns import (
    Anchor,
    BlockRhs,
    CallSignature,
    ConstantEquals,
    DeferredRhs,
    ExprRhs,
    FragmentsEqual,
    GuardTemplate,
    HoleKind,
    Registry,
    RewriteRule,
    RuleKind,
    ShellMode,
    compile_form,
)

EXPR = HoleKind.EXPR
NAME = HoleKind.NAME
INT = HoleKind.INT_CONST
STR = HoleKind.STR_CONST


def _apply_calls(stmt: ast.stmt):
    for node in ast.walk(stmt):
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Attribute)
            and node.func.attr == "apply"
        ):
            yield node


def _probe_apply_named_function(stmt: ast.stmt) -> bool:
    for call in _apply_calls(stmt):
        if call.args and isinstance(call.args[0], ast.Name):
            return True
        if any(kw.arg == "func" and isinstance(kw.value, ast.Name) for kw in call.keywords):
            return True
    return False


def _probe_apply_lambda(stmt: ast.stmt) -> bool:
    for call in _apply_calls(stmt):
        if call.args and isinstance(call.args[0], ast.Lambda):
            return True
        if any(kw.arg == "func" and isinstance(kw.value, ast.Lambda) for kw in call.keywords):
            return True
    return False


_APPLY_SIG = {"apply": CallSignature(params=("func", "axis"), defaults={"axis": 0}, positional=1)}


def _rule_nsmallest() -> RewriteRule:
    # sort-then-take-head collapses to a partial selection.  dtype kinds are
    # pinned to the orderable numeric/temporal set: nsmallest raises on
    # strings and complex values where the sorted original worked fine.
    # Tied values are a documented divergence (partial selection keeps first
    # occurrences; an unstable full sort may order equal values differently).
    rhs = ExprRhs(value="co.nsmallest(n=k)", uses=("co", "k"))
    form = compile_form(
        "co.sort_values().head(n=k)",
        holes={"co": EXPR, "k": INT},
        shell=ShellMode.EXPRESSION,
        rhs=rhs,
    )
    return RewriteRule(
        id="nsmallest",
        kind=RuleKind.GUARDED,
        summary="sort_values().head(n) on a series becomes nsmallest(n)",
        forms=[form],
        anchor=Anchor(names=frozenset({"sort_values", "head"})),
        signatures={
            "head": CallSignature(params=("n",), defaults={"n": 5}, positional=0),
            "sort_values": CallSignature(params=()),
        },
        guards=(
            GuardTemplate("isinstance(co, pd.Series)", uses=("co",)),
            GuardTemplate("co.dtype.kind in 'biufMm'", uses=("co",)),
        ),
    )


def _rule_concat_lists() -> RewriteRule:
    # round-tripping two series through python lists to concatenate them;
    # the constructor call supplies the module name, so the rewrite works
    # under any pandas import alias.  The dtype whitelist pins the cases
    # where list round-tripping is inference-stable (float32 widens, empty
    # inputs fall back to object).
    rhs = ExprRhs(value="mod.concat([x, y], ignore_index=True)", uses=("mod", "x", "y"))
    form = compile_form(
        "mod.Series(x.tolist() + y.tolist())",
        holes={"mod": NAME, "x": EXPR, "y": EXPR},
        shell=ShellMode.EXPRESSION,
        rhs=rhs,
    )
    return RewriteRule(
        id="concat-lists",
        kind=RuleKind.GUARDED,
        summary="Series(a.tolist() + b.tolist()) becomes concat([a, b], ignore_index=True)",
        forms=[form],
        anchor=Anchor(names=frozenset({"Series", "tolist"})),
        guards=(
            GuardTemplate("isinstance(x, mod.Series)", uses=("x", "mod")),
            GuardTemplate("isinstance(y, mod.Series)", uses=("y", "mod")),
            GuardTemplate("x.dtype == y.dtype", uses=("x", "y")),
            GuardTemplate(
                "str(x.dtype) in ('int64', 'float64', 'bool', 'object')", uses=("x",)
            ),
            GuardTemplate("len(x) + len(y) > 0", uses=("x", "y")),
        ),
    )


_SPLIT_LOOP_A = """\
a, b, ls = [], [], ser.tolist()
for it in ls:
    spl = it.split(d, 1)
    a.append(spl[0])
    b.append(spl[1] if len(spl) > 1 else None)
a = pd.Series(a, ser.index)
b = pd.Series(b, ser.index)
"""

_SPLIT_LOOP_B = """\
left, right, ls = [], [], ser.tolist()
for it in ls:
    spl = it.split(d, 1)
    left.append(spl[0])
    right.append(spl[1] if len(spl) > 1 else None)
df[ca] = pd.Series(left, ser.index)
df[cb] = pd.Series(right, ser.index)
"""


def _rule_str_split_loop() -> RewriteRule:
    # the string-accessor split is slower than a plain python loop over the
    # values; the loop reproduces expand=True's two-column result, None for
    # rows without the delimiter.  Only the bounded maxsplit=1 form rewrites:
    # unbounded splits can produce more than two columns.  The null scan keeps
    # NaN-bearing series on the original path (item.split would raise where
    # the accessor propagates the null).
    form_a = compile_form(
        "a, b = ser.str.split(d, m, expand=True)",
        holes={"a": NAME, "b": NAME, "ser": EXPR, "d": STR, "m": INT},
        shell=ShellMode.STATEMENT,
        rhs=BlockRhs(
            source=_SPLIT_LOOP_A,
            uses=("a", "b", "ser", "d"),
            fresh=("ls", "it", "spl"),
        ),
    )
    form_b = compile_form(
        "df[[ca, cb]] = ser.str.split(d, m, expand=True)",
        holes={"df": EXPR, "ca": STR, "cb": STR, "ser": EXPR, "d": STR, "m": INT},
        shell=ShellMode.STATEMENT,
        rhs=BlockRhs(
            source=_SPLIT_LOOP_B,
            uses=("df", "ca", "cb", "ser", "d"),
            fresh=("left", "right", "ls", "it", "spl"),
        ),
    )
    return RewriteRule(
        id="str-split-loop",
        kind=RuleKind.GUARDED,
        summary="two-way str.split(expand=True) becomes a plain loop over the values",
        forms=[form_a, form_b],
        anchor=Anchor(names=frozenset({"split"})),
        signatures={
            "split": CallSignature(
                params=("pat", "n", "expand"),
                defaults={"n": -1, "expand": False},
                positional=1,
            )
        },
        sprecs=(ConstantEquals("m", 1),),
        guards=(
            GuardTemplate("isinstance(ser, pd.Series)", uses=("ser",)),
            GuardTemplate("not ser.isna().any()", uses=("ser",)),
        ),
    )


def _rule_apply_direct() -> RewriteRule:
    # row-wise apply of a function that only does column extraction and
    # arithmetic: pass the whole frame instead, arithmetic broadcasts.
    rhs = DeferredRhs(
        fn_binder="fun",
        frame_binder="df",
        analyze=make_apply_analyzer("fun", ColumnMathOnly),
        synthesize=synthesize_direct_call,
        uses=("df", "fun"),
    )
    form = compile_form(
        "df.apply(fun, axis=1)",
        holes={"df": EXPR, "fun": NAME},
        shell=ShellMode.EXPRESSION,
        rhs=rhs,
    )
    return RewriteRule(
        id="apply-direct",
        kind=RuleKind.DEFERRED,
        summary="apply(fun, axis=1) of a column-math function becomes fun(frame)",
        forms=[form],
        anchor=Anchor(names=frozenset({"apply"}), probe=_probe_apply_named_function),
        signatures=_APPLY_SIG,
    )


def _rule_apply_select() -> RewriteRule:
    # row-wise if/elif/else chain over column tests becomes a vectorized
    # selection: condition list, choice list, first-true-wins with default.
    # Empty frames stay on the original path (apply infers a different dtype
    # for zero rows than the selection does).
    rhs = DeferredRhs(
        fn_binder="fun",
        frame_binder="df",
        analyze=make_apply_analyzer("fun", IfElseVectorizable),
        synthesize=synthesize_select,
        uses=("df", "fun"),
    )
    form = compile_form(
        "df.apply(fun, axis=1)",
        holes={"df": EXPR, "fun": NAME},
        shell=ShellMode.EXPRESSION,
        rhs=rhs,
    )
    return RewriteRule(
        id="apply-select",
        kind=RuleKind.DEFERRED,
        summary="apply(fun, axis=1) of an if/elif/else chain becomes a vectorized selection",
        forms=[form],
        anchor=Anchor(names=frozenset({"apply"}), probe=_probe_apply_named_function),
        signatures=_APPLY_SIG,
        guards=(GuardTemplate("len(df) > 0", uses=("df",)),),
    )


def _rule_substr_contains() -> RewriteRule:
    # apply(lambda x: 'lit' in x) is a vectorized substring test in disguise.
    # Containment on a null raises in the original but yields a null in the
    # vectorized form, hence the full non-null scan; the scan is linear and
    # far cheaper than the row-wise apply it replaces.
    rhs = ExprRhs(value="ser.str.contains(needle, regex=False)", uses=("ser", "needle"))
    form = compile_form(
        "ser.apply(lambda p: needle in q)",
        holes={"ser": EXPR, "p": NAME, "needle": STR, "q": NAME},
        shell=ShellMode.EXPRESSION,
        rhs=rhs,
    )
    return RewriteRule(
        id="substr-contains",
        kind=RuleKind.GUARDED,
        summary="apply(lambda x: needle in x) becomes str.contains(needle, regex=False)",
        forms=[form],
        anchor=Anchor(names=frozenset({"apply"}), probe=_probe_apply_lambda),
        signatures=_APPLY_SIG,
        sprecs=(FragmentsEqual("p", "q"),),
        guards=(
            GuardTemplate("isinstance(ser, pd.Series)", uses=("ser",)),
            GuardTemplate("not ser.isna().any()", uses=("ser",)),
        ),
    )


def builtin_rules() -> Registry:
    """The shipped rules in fixed priority order."""
    return Registry(
        [
            _rule_nsmallest(),
            _rule_concat_lists(),
            _rule_str_split_loop(),
            _rule_apply_direct(),
            _rule_apply_select(),
            _rule_substr_contains(),
        ]
    )
