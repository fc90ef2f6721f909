"""Replacement synthesis: function classification, condition vectorization,
template instantiation, and guarded emission.

Emission never loses the original behavior: guarded and deferred rules wrap
the rewrite in a runtime precondition whose failure branch re-executes the
original window (with hoisted temporaries substituted), so a wrong guess
costs a branch, not correctness.
"""

from __future__ import annotations

import ast
import copy
import hashlib
import re
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .patterns import (
    Bindings,
    BlockRhs,
    DeferredRhs,
    ExprRhs,
    GuardTemplate,
    HoleKind,
    ResolutionScope,
    RewriteRule,
    RuleKind,
    RuleMatch,
)
from .syntax import RESERVED_PREFIX, FreshNamePool, structurally_equal, unparse


class InternalInvariantError(Exception):
    """An emitted plan violated one of the engine's own guarantees."""


# --- function classification ---------------------------------------------


@dataclass(frozen=True)
class ColumnMathOnly:
    """Body is constant-key column extractions of the sole row parameter plus
    one return of arithmetic over the extractions, numeric constants, and
    free names.  Such a function applied row-wise equals calling it once on
    the whole frame (column arithmetic broadcasts)."""

    row_param: str
    extractions: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class IfElseVectorizable:
    """Body is a single if/elif/else chain whose branches all return a
    constant and whose conditions pass the vectorization table."""

    row_param: str
    branches: tuple[tuple[ast.expr, ast.Constant], ...]
    default: ast.Constant


@dataclass(frozen=True)
class SubstringSearch:
    """Lambda testing a constant needle for containment in its parameter."""

    param: str
    needle: str


@dataclass(frozen=True)
class Unknown:
    """Anything the other classifications reject."""


_NUMERIC = (int, float)
_ARITH_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.FloorDiv, ast.Mod, ast.Pow)
_CHOICE_TYPES = (str, int, float, bool, type(None))


class Untranslatable(Exception):
    """A condition uses constructs outside the vectorization table."""


def _skip_docstring(body: Sequence[ast.stmt]) -> list[ast.stmt]:
    if (
        body
        and isinstance(body[0], ast.Expr)
        and isinstance(body[0].value, ast.Constant)
        and isinstance(body[0].value.value, str)
    ):
        return list(body[1:])
    return list(body)


def _plain_row_signature(fn: ast.FunctionDef) -> str | None:
    """First positional parameter name, provided every other parameter is
    defaulted and nothing fancier (varargs, kw-only, posonly) appears."""
    args = fn.args
    if args.posonlyargs or args.vararg or args.kwonlyargs or args.kwarg:
        return None
    if not args.args:
        return None
    if len(args.defaults) != len(args.args) - 1:
        return None
    if any(a.annotation is not None for a in args.args):
        return None
    return args.args[0].arg


def _is_row_subscript(node: ast.AST, row_param: str) -> bool:
    return (
        isinstance(node, ast.Subscript)
        and isinstance(node.value, ast.Name)
        and node.value.id == row_param
        and isinstance(node.slice, ast.Constant)
        and type(node.slice.value) is str
    )


def _mentions(node: ast.AST, name: str) -> bool:
    return any(isinstance(n, ast.Name) and n.id == name for n in ast.walk(node))


def _classify_column_math(fn: ast.FunctionDef, row_param: str) -> ColumnMathOnly | Unknown:
    body = _skip_docstring(fn.body)
    if not body or not isinstance(body[-1], ast.Return) or body[-1].value is None:
        return Unknown()
    extractions: list[tuple[str, str]] = []
    for stmt in body[:-1]:
        if not (
            isinstance(stmt, ast.Assign)
            and len(stmt.targets) == 1
            and isinstance(stmt.targets[0], ast.Name)
            and _is_row_subscript(stmt.value, row_param)
        ):
            return Unknown()
        extractions.append((stmt.targets[0].id, stmt.value.slice.value))

    def arith_ok(node: ast.expr) -> bool:
        if isinstance(node, ast.BinOp):
            return isinstance(node.op, _ARITH_OPS) and arith_ok(node.left) and arith_ok(node.right)
        if isinstance(node, ast.UnaryOp):
            return isinstance(node.op, (ast.USub, ast.UAdd)) and arith_ok(node.operand)
        if isinstance(node, ast.Constant):
            return type(node.value) in _NUMERIC
        if isinstance(node, ast.Name):
            return node.id != row_param
        return False

    if not arith_ok(body[-1].value):
        return Unknown()
    return ColumnMathOnly(row_param=row_param, extractions=tuple(extractions))


def _classify_if_chain(fn: ast.FunctionDef, row_param: str) -> IfElseVectorizable | Unknown:
    body = _skip_docstring(fn.body)
    if len(body) != 1 or not isinstance(body[0], ast.If):
        return Unknown()

    def return_constant(block: Sequence[ast.stmt]) -> ast.Constant | None:
        if len(block) == 1 and isinstance(block[0], ast.Return):
            value = block[0].value
            if isinstance(value, ast.Constant) and type(value.value) in _CHOICE_TYPES:
                return value
        return None

    probe_frame = ast.Name(id="_frame_", ctx=ast.Load())
    branches: list[tuple[ast.expr, ast.Constant]] = []
    node: ast.stmt = body[0]
    while True:
        choice = return_constant(node.body)
        if choice is None:
            return Unknown()
        try:
            vectorize_condition(node.test, row_param, probe_frame)
        except Untranslatable:
            return Unknown()
        branches.append((node.test, choice))
        orelse = node.orelse
        if len(orelse) == 1 and isinstance(orelse[0], ast.If):
            node = orelse[0]
            continue
        default = return_constant(orelse)
        if default is None:
            # a trailing else returning a constant is required: apply with a
            # fall-through branch yields None rows the selection cannot mimic
            return Unknown()
        return IfElseVectorizable(row_param=row_param, branches=tuple(branches), default=default)


def classify_function(fn: ast.FunctionDef | ast.Lambda) -> object:
    """Most specific classification; Unknown whenever anything fails."""
    if isinstance(fn, ast.Lambda):
        args = fn.args
        if args.posonlyargs or args.vararg or args.kwonlyargs or args.kwarg or args.defaults:
            return Unknown()
        if len(args.args) != 1:
            return Unknown()
        param = args.args[0].arg
        body = fn.body
        if (
            isinstance(body, ast.Compare)
            and len(body.ops) == 1
            and isinstance(body.ops[0], ast.In)
            and isinstance(body.left, ast.Constant)
            and type(body.left.value) is str
            and isinstance(body.comparators[0], ast.Name)
            and body.comparators[0].id == param
        ):
            return SubstringSearch(param=param, needle=body.left.value)
        return Unknown()
    if not isinstance(fn, ast.FunctionDef) or fn.decorator_list:
        return Unknown()
    row_param = _plain_row_signature(fn)
    if row_param is None:
        return Unknown()
    result = _classify_column_math(fn, row_param)
    if isinstance(result, ColumnMathOnly):
        return result
    return _classify_if_chain(fn, row_param)


# --- condition vectorization ----------------------------------------------

_COMPARE_OPS = (ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt, ast.GtE)


def vectorize_condition(cond: ast.expr, row_param: str, frame: ast.expr) -> ast.expr:
    """Translate a per-row boolean expression into its columnwise form.

    Implements exactly: row subscripts -> frame subscripts, and/or -> &/| over
    translated operands, not -> ~, the six comparison operators, ``in`` ->
    ``.isin``, ``startswith`` -> ``.str.startswith``; constants and free names
    pass through.  Anything else raises Untranslatable.
    """

    def frame_subscript(node: ast.Subscript) -> ast.expr:
        return ast.Subscript(
            value=copy.deepcopy(frame),
            slice=ast.Constant(value=node.slice.value),
            ctx=ast.Load(),
        )

    def free(node: ast.expr) -> ast.expr:
        if isinstance(node, ast.Name) and node.id != row_param:
            return copy.deepcopy(node)
        if isinstance(node, ast.Constant):
            return copy.deepcopy(node)
        if isinstance(node, (ast.List, ast.Tuple)) and not _mentions(node, row_param):
            return copy.deepcopy(node)
        raise Untranslatable(unparse(node))

    def operand(node: ast.expr) -> tuple[ast.expr, bool]:
        if _is_row_subscript(node, row_param):
            return frame_subscript(node), True
        if isinstance(node, ast.Name) and node.id != row_param:
            return copy.deepcopy(node), False
        if isinstance(node, ast.Constant):
            return copy.deepcopy(node), False
        raise Untranslatable(unparse(node))

    def translate(node: ast.expr) -> ast.expr:
        # translate() sees condition positions only; a bare subscript would
        # become a non-boolean condlist entry, which np.select rejects
        if isinstance(node, ast.BoolOp):
            op = ast.BitAnd() if isinstance(node.op, ast.And) else ast.BitOr()
            parts = [translate(v) for v in node.values]
            out = parts[0]
            for part in parts[1:]:
                out = ast.BinOp(left=out, op=copy.deepcopy(op), right=part)
            return out
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return ast.UnaryOp(op=ast.Invert(), operand=translate(node.operand))
        if isinstance(node, ast.Compare) and len(node.ops) == 1:
            op = node.ops[0]
            if isinstance(op, _COMPARE_OPS):
                left, left_row = operand(node.left)
                right, right_row = operand(node.comparators[0])
                if not (left_row or right_row):
                    raise Untranslatable(unparse(node))
                return ast.Compare(left=left, ops=[copy.deepcopy(op)], comparators=[right])
            if isinstance(op, ast.In):
                right = node.comparators[0]
                # `x in "abc"` is substring containment, not membership
                if not _is_row_subscript(node.left, row_param) or isinstance(
                    right, ast.Constant
                ):
                    raise Untranslatable(unparse(node))
                return ast.Call(
                    func=ast.Attribute(
                        value=frame_subscript(node.left), attr="isin", ctx=ast.Load()
                    ),
                    args=[free(right)],
                    keywords=[],
                )
            raise Untranslatable(unparse(node))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Attribute)
            and node.func.attr == "startswith"
            and _is_row_subscript(node.func.value, row_param)
            and len(node.args) == 1
            and not node.keywords
        ):
            return ast.Call(
                func=ast.Attribute(
                    value=ast.Attribute(
                        value=frame_subscript(node.func.value), attr="str", ctx=ast.Load()
                    ),
                    attr="startswith",
                    ctx=ast.Load(),
                ),
                args=[free(node.args[0])],
                keywords=[],
            )
        raise Untranslatable(unparse(node))

    return ast.fix_missing_locations(translate(cond))


# --- deferred-rule analysis ------------------------------------------------


@dataclass
class DeferredAnalysis:
    fn_name: str
    fn_node: ast.FunctionDef
    digest: str
    classification: ColumnMathOnly | IfElseVectorizable


def source_digest(fn: ast.FunctionDef) -> str:
    """Digest of the function's canonicalized tree.

    Invariant to comments and whitespace, sensitive to any semantic edit.
    The emitted integrity guard recomputes the same digest at run time from
    ``inspect.getsource``.
    """
    return hashlib.sha256(ast.dump(fn).encode()).hexdigest()


def _latest_def(body: Sequence[ast.stmt], name: str) -> ast.FunctionDef | None:
    for stmt in reversed(list(body)):
        if isinstance(stmt, ast.FunctionDef) and stmt.name == name:
            if stmt.decorator_list:
                return None
            return stmt
    return None


_DEF_LINE = r"^(?:async\s+)?def\s+{name}\s*\("


def _def_block_scan(history: str, name: str) -> ast.FunctionDef | None:
    """Recover a column-0 def block from a history buffer that does not parse
    as a whole (e.g. it carries magics from passed-through cells)."""
    pattern = re.compile(_DEF_LINE.format(name=re.escape(name)))
    lines = history.splitlines(keepends=True)
    found: ast.FunctionDef | None = None
    for i, line in enumerate(lines):
        if not pattern.match(line):
            continue
        block = [line]
        for follow in lines[i + 1 :]:
            if follow.strip() == "" or follow[0] in " \t#":
                block.append(follow)
            else:
                break
        try:
            module = ast.parse("".join(block))
        except SyntaxError:
            continue
        if module.body and isinstance(module.body[0], ast.FunctionDef):
            candidate = module.body[0]
            if candidate.name == name and not candidate.decorator_list:
                found = candidate
    return found


def resolve_function(name: str, scope: ResolutionScope) -> ast.FunctionDef | None:
    """Latest top-level def of ``name`` visible at the window: current cell
    first (statements before the window), then the history buffer."""
    fn = _latest_def(scope.cell.module.body[: scope.top_index], name)
    if fn is not None:
        return fn
    if not scope.history:
        return None
    try:
        module = ast.parse(scope.history)
    except (SyntaxError, ValueError):
        return _def_block_scan(scope.history, name)
    return _latest_def(module.body, name)


def make_apply_analyzer(fn_binder: str, accepted: type):
    """Gate for deferred apply rules: resolve the named function, classify it,
    and admit the match only for the rule's classification."""

    def analyze(bindings: Bindings, scope: ResolutionScope) -> DeferredAnalysis | None:
        fn_ref = bindings.values[fn_binder]
        assert isinstance(fn_ref, ast.Name)
        fn_node = resolve_function(fn_ref.id, scope)
        if fn_node is None:
            return None
        classification = classify_function(fn_node)
        if not isinstance(classification, accepted):
            return None
        return DeferredAnalysis(
            fn_name=fn_ref.id,
            fn_node=fn_node,
            digest=source_digest(fn_node),
            classification=classification,
        )

    return analyze


def synthesize_direct_call(
    analysis: DeferredAnalysis, frame_temp: str, pool: FreshNamePool
) -> tuple[list[ast.stmt], ast.expr]:
    """Row-wise apply of a column-math function becomes one whole-frame call."""
    value = ast.Call(
        func=ast.Name(id=analysis.fn_name, ctx=ast.Load()),
        args=[ast.Name(id=frame_temp, ctx=ast.Load())],
        keywords=[],
    )
    return [], ast.fix_missing_locations(value)


def synthesize_select(
    analysis: DeferredAnalysis, frame_temp: str, pool: FreshNamePool
) -> tuple[list[ast.stmt], ast.expr]:
    """Row-wise if/elif/else chain becomes a columnwise selection.

    First true condition wins, like the chain; the result is wrapped in a
    series carrying the frame's index so it lines up with what apply returned.
    """
    cls = analysis.classification
    assert isinstance(cls, IfElseVectorizable)
    frame = ast.Name(id=frame_temp, ctx=ast.Load())
    conditions = [
        vectorize_condition(cond, cls.row_param, frame) for cond, _ in cls.branches
    ]
    choices = [copy.deepcopy(choice) for _, choice in cls.branches]
    conds_name = pool.fresh("conditions")
    choices_name = pool.fresh("choices")
    prelude = [
        ast.Assign(
            targets=[ast.Name(id=conds_name, ctx=ast.Store())],
            value=ast.List(elts=conditions, ctx=ast.Load()),
        ),
        ast.Assign(
            targets=[ast.Name(id=choices_name, ctx=ast.Store())],
            value=ast.List(elts=choices, ctx=ast.Load()),
        ),
    ]
    select = ast.Call(
        func=ast.Attribute(value=ast.Name(id="np", ctx=ast.Load()), attr="select", ctx=ast.Load()),
        args=[ast.Name(id=conds_name, ctx=ast.Load()), ast.Name(id=choices_name, ctx=ast.Load())],
        keywords=[ast.keyword(arg="default", value=copy.deepcopy(cls.default))],
    )
    value = ast.Call(
        func=ast.Attribute(value=ast.Name(id="pd", ctx=ast.Load()), attr="Series", ctx=ast.Load()),
        args=[select],
        keywords=[
            ast.keyword(
                arg="index",
                value=ast.Attribute(
                    value=ast.Name(id=frame_temp, ctx=ast.Load()), attr="index", ctx=ast.Load()
                ),
            )
        ],
    )
    return [ast.fix_missing_locations(s) for s in prelude], ast.fix_missing_locations(value)


# --- template instantiation -------------------------------------------------


class _Substituter(ast.NodeTransformer):
    def __init__(self, mapping: Mapping[str, ast.AST | str]):
        self.mapping = mapping

    def visit_Name(self, node: ast.Name) -> ast.AST:
        if node.id not in self.mapping:
            return node
        value = self.mapping[node.id]
        if isinstance(value, str):
            return ast.copy_location(ast.Name(id=value, ctx=node.ctx), node)
        if isinstance(value, ast.Name):
            return ast.copy_location(ast.Name(id=value.id, ctx=node.ctx), node)
        return copy.deepcopy(value)


def instantiate_statements(source: str, mapping: Mapping[str, ast.AST | str]) -> list[ast.stmt]:
    module = ast.parse(source)
    module = ast.fix_missing_locations(_Substituter(mapping).visit(module))
    return module.body


def instantiate_expression(source: str, mapping: Mapping[str, ast.AST | str]) -> ast.expr:
    expr = ast.parse(source, mode="eval").body
    return ast.fix_missing_locations(_Substituter(mapping).visit(expr))


class _IdentitySwap(ast.NodeTransformer):
    """Replace exact node objects (by identity) with temp names."""

    def __init__(self, table: Mapping[int, str]):
        self.table = table

    def visit(self, node: ast.AST) -> ast.AST:
        temp = self.table.get(id(node))
        if temp is not None:
            return ast.copy_location(ast.Name(id=temp, ctx=ast.Load()), node)
        return super().generic_visit(node)


# --- guarded emission --------------------------------------------------------


@dataclass
class RewritePlan:
    match: RuleMatch
    replacement: list[ast.stmt]
    hoisted: list[tuple[str, ast.expr]]
    guard: ast.expr | None
    guard_stmts: list[ast.stmt]
    branches: tuple[list[ast.stmt], list[ast.stmt]] | None
    always_stmts: list[ast.stmt]

    @property
    def rule_id(self) -> str:
        return self.match.rule.id

    def guard_text(self) -> str | None:
        return unparse(self.guard) if self.guard is not None else None


def _assign(temp: str, value: ast.expr) -> ast.Assign:
    node = ast.Assign(targets=[ast.Name(id=temp, ctx=ast.Store())], value=copy.deepcopy(value))
    return ast.fix_missing_locations(node)


def build_integrity_guard(
    frame_temp: str, fn_name: str, digest: str, pool: FreshNamePool
) -> tuple[list[ast.stmt], ast.expr]:
    """Deferred-rule precondition computed into a boolean temp.

    The frame type test, callability test, and source-digest comparison all
    run inside try/except: any exception (unbound names, builtins without
    source, exotic objects) counts as guard failure, never a user error.
    """
    ok = pool.fresh("ok")
    ast_mod = pool.fresh("ast")
    hash_mod = pool.fresh("hashlib")
    inspect_mod = pool.fresh("inspect")
    wrap_mod = pool.fresh("textwrap")
    source = (
        f"{ok} = False\n"
        f"try:\n"
        f"    import ast as {ast_mod}, hashlib as {hash_mod}, "
        f"inspect as {inspect_mod}, textwrap as {wrap_mod}\n"
        f"    {ok} = isinstance({frame_temp}, pd.DataFrame) and callable({fn_name}) and "
        f"{hash_mod}.sha256({ast_mod}.dump({ast_mod}.parse("
        f"{wrap_mod}.dedent({inspect_mod}.getsource({fn_name}))).body[0])"
        f".encode()).hexdigest() == '{digest}'\n"
        f"except Exception:\n"
        f"    {ok} = False\n"
    )
    stmts = ast.parse(source).body
    return stmts, ast.Name(id=ok, ctx=ast.Load())


def plan_rewrite(match: RuleMatch, pool: FreshNamePool) -> RewritePlan:
    """Build the replacement statements for one claimed window."""
    rule = match.rule
    bindings = match.bindings
    form = rule.forms[bindings.form_index]
    rhs = form.rhs

    guard_uses: set[str] = set()
    for guard in rule.guards:
        guard_uses.update(guard.uses)
    if isinstance(rhs, DeferredRhs):
        guard_uses.add(rhs.frame_binder)

    temps: dict[str, str] = {}
    hoist_stmts: list[ast.stmt] = []
    hoisted: list[tuple[str, ast.expr]] = []
    for binder in form.binder_order:
        if binder not in guard_uses or form.holes[binder] is not HoleKind.EXPR:
            continue
        temp = pool.fresh(binder)
        temps[binder] = temp
        bound = bindings.values[binder]
        hoist_stmts.append(_assign(temp, bound))
        hoisted.append((temp, bound))

    substitution: dict[str, ast.AST | str] = {}
    for binder, value in bindings.values.items():
        substitution[binder] = temps.get(binder, value)

    fresh_locals = {
        name: pool.fresh(name) for name in getattr(rhs, "fresh", ())
    }
    rhs_mapping = dict(substitution)
    rhs_mapping.update(fresh_locals)

    # fallback: the normalized window with hoisted expressions swapped for temps
    swap_table = {id(bindings.values[b]): t for b, t in temps.items()}
    fallback = [
        _IdentitySwap(swap_table).visit(copy_stmt)
        for copy_stmt in bindings.normalized
    ]
    fallback = [ast.fix_missing_locations(s) for s in fallback]

    guard_stmts: list[ast.stmt] = []
    conjuncts = [instantiate_expression(g.source, substitution) for g in rule.guards]
    if isinstance(rhs, DeferredRhs):
        assert match.deferred is not None
        pre, ok_expr = build_integrity_guard(
            temps[rhs.frame_binder], match.deferred.fn_name, match.deferred.digest, pool
        )
        guard_stmts = pre
        conjuncts = [ok_expr] + conjuncts

    condition: ast.expr | None = None
    if rule.kind is not RuleKind.PLAIN:
        if not conjuncts:
            raise InternalInvariantError(f"rule {rule.id}: guarded rule without guards")
        condition = conjuncts[0] if len(conjuncts) == 1 else ast.BoolOp(
            op=ast.And(), values=conjuncts
        )
        condition = ast.fix_missing_locations(condition)

    if isinstance(rhs, BlockRhs):
        then_stmts = instantiate_statements(rhs.source, rhs_mapping)
        else_stmts = fallback
        trailing: list[ast.stmt] = []
    else:
        if isinstance(rhs, DeferredRhs):
            prelude, value = rhs.synthesize(match.deferred, temps[rhs.frame_binder], pool)
        else:
            prelude = []
            for src in rhs.prelude:
                prelude.extend(instantiate_statements(src, rhs_mapping))
            value = instantiate_expression(rhs.value, rhs_mapping)
        shell = fallback[0]
        if isinstance(shell, ast.Assign):
            then_stmts = prelude + [
                ast.fix_missing_locations(
                    ast.Assign(targets=copy.deepcopy(shell.targets), value=value)
                )
            ]
            else_stmts = [shell]
            trailing = []
        elif isinstance(shell, ast.Expr):
            result = pool.fresh("res")
            then_stmts = prelude + [_assign(result, value)]
            else_stmts = [_assign(result, shell.value)]
            trailing = [
                ast.fix_missing_locations(
                    ast.Expr(value=ast.Name(id=result, ctx=ast.Load()))
                )
            ]
        else:  # pragma: no cover - shells are filtered during matching
            raise InternalInvariantError(f"rule {rule.id}: unsupported shell")

    if rule.kind is RuleKind.PLAIN:
        replacement = then_stmts + trailing
        branches = None
        always = trailing
    else:
        branch = ast.If(test=condition, body=then_stmts, orelse=else_stmts)
        replacement = hoist_stmts + guard_stmts + [ast.fix_missing_locations(branch)] + trailing
        branches = (then_stmts, else_stmts)
        always = hoist_stmts + guard_stmts + trailing

    plan = RewritePlan(
        match=match,
        replacement=replacement,
        hoisted=hoisted,
        guard=condition,
        guard_stmts=guard_stmts,
        branches=branches,
        always_stmts=always,
    )
    validate_plan(plan)
    return plan


# --- plan invariants ---------------------------------------------------------


def _maximal_counts(roots: Sequence[ast.AST], needles: set[str]) -> Counter:
    """Occurrences of each needle, not descending into a counted match (so a
    hoisted expression nested inside another counts once, at the outer site)."""
    counts: Counter = Counter()

    def visit(node: ast.AST) -> None:
        if isinstance(node, ast.expr):
            dump = ast.dump(node)
            if dump in needles:
                counts[dump] += 1
                return
        for child in ast.iter_child_nodes(node):
            visit(child)

    for root in roots:
        visit(root)
    return counts


def assigned_names(stmts: Sequence[ast.stmt], keep_sentinels: bool = False) -> set[str]:
    """Names (or subscript/attribute root names) a block assigns into."""
    out: set[str] = set()

    def target(node: ast.AST) -> None:
        if isinstance(node, ast.Name):
            out.add(node.id)
        elif isinstance(node, (ast.Tuple, ast.List)):
            for elt in node.elts:
                target(elt)
        elif isinstance(node, ast.Starred):
            target(node.value)
        elif isinstance(node, (ast.Subscript, ast.Attribute)):
            root = node
            while isinstance(root, (ast.Subscript, ast.Attribute)):
                root = root.value
            if isinstance(root, ast.Name):
                out.add(root.id)

    for stmt in stmts:
        for node in ast.walk(stmt):
            if isinstance(node, ast.Assign):
                for t in node.targets:
                    target(t)
            elif isinstance(node, (ast.AugAssign, ast.AnnAssign)):
                target(node.target)
            elif isinstance(node, (ast.For, ast.AsyncFor)):
                target(node.target)
            elif isinstance(node, ast.NamedExpr):
                target(node.target)
            elif isinstance(node, ast.withitem) and node.optional_vars is not None:
                target(node.optional_vars)
            elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                out.add(node.name)
            elif isinstance(node, (ast.Import, ast.ImportFrom)):
                for alias in node.names:
                    out.add(alias.asname or alias.name.split(".")[0])
    if keep_sentinels:
        return out
    return {name for name in out if not name.startswith(RESERVED_PREFIX)}


def validate_plan(plan: RewritePlan) -> None:
    """Assert the emission contract; raises InternalInvariantError."""
    rule_id = plan.rule_id
    text = "\n".join(unparse(stmt) for stmt in plan.replacement)
    try:
        reparsed = ast.parse(text)
    except SyntaxError as exc:  # pragma: no cover - would be an emission bug
        raise InternalInvariantError(f"rule {rule_id}: replacement does not parse: {exc}")
    stable = "\n".join(unparse(stmt) for stmt in reparsed.body)
    if stable != text:  # pragma: no cover
        raise InternalInvariantError(f"rule {rule_id}: replacement does not unparse stably")

    # each hoisted expression is evaluated at its hoist site, and no execution
    # path evaluates it more often than the original window did
    expected = Counter(ast.dump(expr) for _, expr in plan.hoisted)
    if expected:
        needles = set(expected)
        original_counts = _maximal_counts(plan.match.original, needles)
        always = _maximal_counts(plan.always_stmts, needles)
        if plan.branches is None:
            paths = [always]
        else:
            paths = [
                always + _maximal_counts(branch, needles) for branch in plan.branches
            ]
        for dump in needles:
            if always[dump] != expected[dump]:
                raise InternalInvariantError(
                    f"rule {rule_id}: hoist sites carry {always[dump]} copies of a "
                    f"hoisted expression, expected {expected[dump]}"
                )
            for path in paths:
                if path[dump] > original_counts[dump]:
                    raise InternalInvariantError(
                        f"rule {rule_id}: an execution path evaluates a hoisted "
                        f"expression {path[dump]} times, original window had "
                        f"{original_counts[dump]}"
                    )

    if plan.branches is not None:
        then_names = assigned_names(plan.branches[0])
        else_names = assigned_names(plan.branches[1])
        original_names = assigned_names(plan.match.original)
        if not (then_names == else_names == original_names):
            raise InternalInvariantError(
                f"rule {rule_id}: branch assignment sets differ: "
                f"then={sorted(then_names)} else={sorted(else_names)} "
                f"original={sorted(original_names)}"
            )


_PURE_CALLABLES = {"isinstance", "callable", "getattr", "str", "len", "type"}


def guard_region_is_pure(plan: RewritePlan) -> bool:
    """Guards may test types, read attributes of hoisted temps, compare
    digests, and run vectorized null/dtype checks; they never call user code."""

    def chain_root(node: ast.expr) -> str | None:
        while isinstance(node, (ast.Attribute, ast.Subscript, ast.Call)):
            node = node.func if isinstance(node, ast.Call) else node.value
        return node.id if isinstance(node, ast.Name) else None

    def expr_ok(node: ast.expr) -> bool:
        for sub in ast.walk(node):
            if isinstance(sub, ast.Call):
                func = sub.func
                if isinstance(func, ast.Name):
                    if func.id not in _PURE_CALLABLES:
                        return False
                elif isinstance(func, ast.Attribute):
                    root = chain_root(func)
                    if root is None or not root.startswith(RESERVED_PREFIX):
                        return False
                else:
                    return False
        return True

    checks: list[ast.expr] = []
    if plan.guard is not None:
        checks.append(plan.guard)
    for stmt in plan.guard_stmts:
        for node in ast.walk(stmt):
            if isinstance(node, ast.Assign):
                checks.append(node.value)
            elif isinstance(node, (ast.Import, ast.ImportFrom)):
                for alias in node.names:
                    if not (alias.asname or "").startswith(RESERVED_PREFIX):
                        return False
    return all(expr_ok(check) for check in checks)
