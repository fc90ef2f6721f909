"""Rewrite-rule data model and the statement-window pattern matcher.

Rules carry one or more LHS forms.  A form is plain Python source in which
declared binder identifiers stand for typed holes; everything else must appear
in the subject verbatim (modulo keyword/positional normalization driven by
per-rule call signatures).  Matching is purely syntactic and never executes
user code.
"""

from __future__ import annotations

import ast
import copy
import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Protocol, Sequence

from .syntax import (
    RESERVED_PREFIX,
    FreshNamePool,
    ParsedCell,
    structurally_equal,
)


class RuleError(Exception):
    """A rule definition is malformed (authoring error, not a match failure)."""


class HoleKind(enum.Enum):
    EXPR = "expr"
    NAME = "name"
    INT_CONST = "int-const"
    STR_CONST = "str-const"
    LAMBDA = "lambda"
    FUNC_NAME = "func-name"


class ShellMode(enum.Enum):
    # EXPRESSION forms match a whole statement value (bare expression or the
    # right-hand side of an assignment); STATEMENT forms match statements
    # literally, target shape included.
    EXPRESSION = "expression"
    STATEMENT = "statement"


class RuleKind(enum.Enum):
    PLAIN = "plain"
    GUARDED = "guarded"
    DEFERRED = "deferred"


@dataclass(frozen=True)
class CallSignature:
    """Parameter order, defaults, and rendering style for one callee name.

    ``positional`` is how many leading parameters are re-rendered positionally
    when the normalized call is emitted into the fallback branch.
    """

    params: tuple[str, ...]
    defaults: Mapping[str, object] = field(default_factory=dict)
    positional: int = 0


@dataclass(frozen=True)
class ExprRhs:
    """Replacement for expression-shaped rules: optional prelude statements
    plus the value that takes the matched expression's place."""

    value: str
    uses: tuple[str, ...]
    prelude: tuple[str, ...] = ()
    fresh: tuple[str, ...] = ()


@dataclass(frozen=True)
class BlockRhs:
    """Replacement for statement-shaped rules: a block that supersedes the
    whole matched window, re-binding the window's own targets."""

    source: str
    uses: tuple[str, ...]
    fresh: tuple[str, ...] = ()


@dataclass(frozen=True)
class DeferredRhs:
    """Replacement synthesized from static analysis of a named function.

    ``analyze`` resolves and classifies the function from cell+history text;
    returning None vetoes the match.  ``synthesize`` builds (prelude, value)
    from the analysis once the match is claimed.
    """

    fn_binder: str
    frame_binder: str
    analyze: Callable[["Bindings", "ResolutionScope"], Any]
    synthesize: Callable[[Any, str, FreshNamePool], tuple[list[ast.stmt], ast.expr]]
    uses: tuple[str, ...]


RhsSpec = ExprRhs | BlockRhs | DeferredRhs


@dataclass(frozen=True)
class GuardTemplate:
    """One runtime-precondition conjunct, as source over binder names."""

    source: str
    uses: tuple[str, ...]


class SyntacticPrecondition(Protocol):
    def holds(self, values: Mapping[str, ast.AST]) -> bool: ...

    def describe(self) -> str: ...

    @property
    def binders(self) -> tuple[str, ...]: ...


@dataclass(frozen=True)
class FragmentsEqual:
    left: str
    right: str

    @property
    def binders(self) -> tuple[str, ...]:
        return (self.left, self.right)

    def holds(self, values: Mapping[str, ast.AST]) -> bool:
        return structurally_equal(values[self.left], values[self.right])

    def describe(self) -> str:
        return f"{self.left} == {self.right}"


@dataclass(frozen=True)
class ConstantEquals:
    binder: str
    value: object

    @property
    def binders(self) -> tuple[str, ...]:
        return (self.binder,)

    def holds(self, values: Mapping[str, ast.AST]) -> bool:
        node = values[self.binder]
        return (
            isinstance(node, ast.Constant)
            and type(node.value) is type(self.value)
            and node.value == self.value
        )

    def describe(self) -> str:
        return f"{self.binder} == {self.value!r}"


@dataclass(frozen=True)
class ArityEquals:
    """Bound fragment is a tuple/list/call with exactly ``count`` elements."""

    binder: str
    count: int

    @property
    def binders(self) -> tuple[str, ...]:
        return (self.binder,)

    def holds(self, values: Mapping[str, ast.AST]) -> bool:
        node = values[self.binder]
        if isinstance(node, (ast.Tuple, ast.List)):
            return len(node.elts) == self.count
        if isinstance(node, ast.Call):
            return len(node.args) + len(node.keywords) == self.count
        return False

    def describe(self) -> str:
        return f"arity({self.binder}) == {self.count}"


@dataclass(frozen=True)
class Anchor:
    """Cheap dispatch filter: required names plus an optional shape probe.

    Must be a superset filter; a probe may only reject statements the full
    matcher would reject too.
    """

    names: frozenset[str]
    probe: Callable[[ast.stmt], bool] | None = None

    def admits(self, stmt: ast.stmt, present: frozenset[str]) -> bool:
        if not self.names <= present:
            return False
        return self.probe is None or self.probe(stmt)


@dataclass
class PatternForm:
    statements: list[ast.stmt]
    holes: dict[str, HoleKind]
    shell: ShellMode
    rhs: RhsSpec
    binder_order: list[str]

    @property
    def arity(self) -> int:
        return len(self.statements)


@dataclass
class RewriteRule:
    id: str
    kind: RuleKind
    summary: str
    forms: list[PatternForm]
    anchor: Anchor
    signatures: dict[str, CallSignature] = field(default_factory=dict)
    sprecs: tuple[SyntacticPrecondition, ...] = ()
    guards: tuple[GuardTemplate, ...] = ()
    notes: str = ""

    @property
    def max_arity(self) -> int:
        return max(form.arity for form in self.forms)


@dataclass
class Bindings:
    values: dict[str, ast.AST]
    start: int
    arity: int
    normalized: list[ast.stmt]
    form_index: int


@dataclass(frozen=True)
class Location:
    path: tuple[tuple[str, int], ...]
    list_field: str
    start: int
    arity: int
    top_index: int

    @property
    def nested(self) -> bool:
        return bool(self.path)


@dataclass
class RuleMatch:
    rule: RewriteRule
    bindings: Bindings
    location: Location
    original: list[ast.stmt]
    deferred: Any | None = None


@dataclass(frozen=True)
class ResolutionScope:
    """What deferred analysis may look at: the cell up to the window's
    top-level statement, plus the history buffer."""

    cell: ParsedCell
    history: str
    top_index: int


def _dfs(node: ast.AST) -> Iterator[ast.AST]:
    yield node
    for child in ast.iter_child_nodes(node):
        yield from _dfs(child)


def compile_form(
    source: str,
    holes: Mapping[str, HoleKind],
    shell: ShellMode,
    rhs: RhsSpec,
) -> PatternForm:
    """Parse and validate one LHS form."""
    try:
        module = ast.parse(source)
    except SyntaxError as exc:
        raise RuleError(f"pattern does not parse: {exc}") from exc
    if not module.body:
        raise RuleError("pattern is empty")
    if shell is ShellMode.EXPRESSION:
        if len(module.body) != 1 or not isinstance(module.body[0], ast.Expr):
            raise RuleError("expression form must be a single bare expression")

    seen: list[str] = []
    for stmt in module.body:
        for node in _dfs(stmt):
            if isinstance(node, ast.Name) and node.id in holes:
                seen.append(node.id)
            elif isinstance(node, ast.arg) and node.arg in holes:
                seen.append(node.arg)
            elif isinstance(node, ast.Attribute) and node.attr in holes:
                seen.append(node.attr)
    for name in holes:
        count = seen.count(name)
        if count == 0:
            raise RuleError(f"binder {name!r} does not occur in the pattern")
        if count > 1:
            raise RuleError(f"duplicate binder {name!r} in the pattern")
    return PatternForm(
        statements=module.body,
        holes=dict(holes),
        shell=shell,
        rhs=rhs,
        binder_order=seen,
    )


def validate_rule(rule: RewriteRule) -> None:
    """Binder-closure and shape checks; raises RuleError naming the binder."""
    if not rule.forms:
        raise RuleError(f"rule {rule.id}: no forms")
    shared = set(rule.forms[0].holes)
    for form in rule.forms[1:]:
        shared &= set(form.holes)
    for form in rule.forms:
        if form.arity < 1:
            raise RuleError(f"rule {rule.id}: empty window")
        rhs = form.rhs
        for binder in rhs.uses:
            if binder not in form.holes:
                raise RuleError(
                    f"rule {rule.id}: replacement references unbound binder {binder!r}"
                )
        if isinstance(rhs, DeferredRhs):
            for binder in (rhs.fn_binder, rhs.frame_binder):
                if binder not in form.holes:
                    raise RuleError(
                        f"rule {rule.id}: replacement references unbound binder {binder!r}"
                    )
    for prec in rule.sprecs:
        for binder in prec.binders:
            if binder not in shared:
                raise RuleError(
                    f"rule {rule.id}: precondition references unbound binder {binder!r}"
                )
    for guard in rule.guards:
        for binder in guard.uses:
            if binder not in shared:
                raise RuleError(
                    f"rule {rule.id}: guard references unbound binder {binder!r}"
                )


class Registry:
    """The rule set with per-rule enable flags, in fixed priority order."""

    def __init__(self, rules: Sequence[RewriteRule]):
        ids = [rule.id for rule in rules]
        if len(set(ids)) != len(ids):
            raise RuleError("duplicate rule ids")
        for rule in rules:
            validate_rule(rule)
        self._rules = list(rules)
        self._enabled = {rule.id: True for rule in rules}

    def ids(self) -> list[str]:
        return [rule.id for rule in self._rules]

    def get(self, rule_id: str) -> RewriteRule:
        for rule in self._rules:
            if rule.id == rule_id:
                return rule
        raise KeyError(rule_id)

    def active(self) -> list[RewriteRule]:
        return [rule for rule in self._rules if self._enabled[rule.id]]

    def select(self, only: Sequence[str] | None = None, disable: Sequence[str] = ()) -> "Registry":
        """New registry with the same rules, re-flagged."""
        for rule_id in list(only or []) + list(disable):
            if rule_id not in self._enabled:
                raise KeyError(rule_id)
        out = Registry(self._rules)
        if only is not None:
            wanted = set(only)
            out._enabled = {rid: rid in wanted for rid in out._enabled}
        out._enabled.update({rid: False for rid in disable})
        return out


# --- matching -----------------------------------------------------------


class MatchFailed(Exception):
    pass


_FAIL = MatchFailed()


@dataclass
class _MatchState:
    holes: Mapping[str, HoleKind]
    signatures: Mapping[str, CallSignature]
    bound: dict[str, ast.AST]


def _hole_admits(kind: HoleKind, node: ast.AST) -> bool:
    if kind is HoleKind.EXPR:
        return isinstance(node, ast.expr)
    if kind is HoleKind.NAME:
        return isinstance(node, ast.Name)
    if kind is HoleKind.LAMBDA:
        return isinstance(node, ast.Lambda)
    if kind is HoleKind.INT_CONST:
        return isinstance(node, ast.Constant) and type(node.value) is int
    if kind is HoleKind.STR_CONST:
        return isinstance(node, ast.Constant) and type(node.value) is str
    if kind is HoleKind.FUNC_NAME:
        return isinstance(node, ast.Name)
    raise AssertionError(kind)


def _callee_name(func: ast.expr) -> str | None:
    if isinstance(func, ast.Attribute):
        return func.attr
    if isinstance(func, ast.Name):
        return func.id
    return None


def _call_param_map(call: ast.Call, sig: CallSignature) -> dict[str, ast.expr] | None:
    """Map a call's arguments onto signature parameters; None if it uses
    anything the table cannot express (starargs, unknown/duplicate keywords)."""
    mapping: dict[str, ast.expr] = {}
    if len(call.args) > len(sig.params):
        return None
    for param, value in zip(sig.params, call.args):
        if isinstance(value, ast.Starred):
            return None
        mapping[param] = value
    for kw in call.keywords:
        if kw.arg is None or kw.arg not in sig.params or kw.arg in mapping:
            return None
        mapping[kw.arg] = kw.value
    return mapping


def _render_call(call: ast.Call, mapping: dict[str, ast.expr], sig: CallSignature) -> None:
    """Rewrite the (copied) subject call into canonical argument order."""
    args: list[ast.expr] = []
    for param in sig.params[: sig.positional]:
        if param not in mapping:
            break
        args.append(mapping[param])
    rendered = {sig.params[i] for i in range(len(args))}
    call.args = args
    call.keywords = [
        ast.keyword(arg=param, value=mapping[param])
        for param in sig.params
        if param in mapping and param not in rendered
    ]


def _synth_constant(value: object) -> ast.Constant:
    node = ast.Constant(value=value)
    node.lineno = node.end_lineno = 1
    node.col_offset = node.end_col_offset = 0
    return node


def _match_node(pat: ast.AST, sub: ast.AST, st: _MatchState) -> None:
    if isinstance(pat, ast.Name) and pat.id in st.holes:
        kind = st.holes[pat.id]
        if not _hole_admits(kind, sub):
            raise _FAIL
        st.bound[pat.id] = sub
        return
    if type(pat) is not type(sub):
        raise _FAIL
    if isinstance(pat, ast.arg) and pat.arg in st.holes:
        if st.holes[pat.arg] is not HoleKind.NAME:
            raise _FAIL
        if pat.annotation is not None or sub.annotation is not None:
            raise _FAIL
        st.bound[pat.arg] = ast.Name(id=sub.arg, ctx=ast.Load())
        return
    if isinstance(pat, ast.Attribute) and pat.attr in st.holes:
        if st.holes[pat.attr] is not HoleKind.FUNC_NAME:
            raise _FAIL
        st.bound[pat.attr] = ast.Name(id=sub.attr, ctx=ast.Load())
        _match_node(pat.value, sub.value, st)
        return
    if isinstance(pat, ast.Call):
        _match_call(pat, sub, st)
        return
    _match_fields(pat, sub, st)


def _match_call(pat: ast.Call, sub: ast.Call, st: _MatchState) -> None:
    name = _callee_name(pat.func)
    sig = st.signatures.get(name) if name else None
    if sig is None:
        _match_fields(pat, sub, st)
        return
    pat_map = _call_param_map(pat, sig)
    if pat_map is None:
        raise RuleError(f"pattern call to {name!r} does not fit its signature table")
    sub_map = _call_param_map(sub, sig)
    if sub_map is None:
        raise _FAIL
    for param in pat_map:
        if param not in sub_map:
            if param not in sig.defaults:
                raise _FAIL
            sub_map[param] = _synth_constant(sig.defaults[param])
    if set(sub_map) != set(pat_map):
        raise _FAIL
    _match_node(pat.func, sub.func, st)
    for param in sig.params:
        if param in pat_map:
            _match_node(pat_map[param], sub_map[param], st)
    _render_call(sub, sub_map, sig)


def _match_fields(pat: ast.AST, sub: ast.AST, st: _MatchState) -> None:
    for name in pat._fields:
        _match_value(getattr(pat, name), getattr(sub, name), st)


def _match_value(pat: object, sub: object, st: _MatchState) -> None:
    if isinstance(pat, ast.AST):
        if not isinstance(sub, ast.AST):
            raise _FAIL
        _match_node(pat, sub, st)
    elif isinstance(pat, list):
        if not isinstance(sub, list) or len(pat) != len(sub):
            raise _FAIL
        for p, s in zip(pat, sub):
            _match_value(p, s, st)
    else:
        if isinstance(sub, (ast.AST, list)):
            raise _FAIL
        if type(pat) is not type(sub) or pat != sub:
            raise _FAIL


def match_window(rule: RewriteRule, stmts: Sequence[ast.stmt], start: int) -> Bindings | None:
    """Try each form of the rule at a fixed start index.

    Matching runs against deep copies; on success the copies hold the
    keyword-normalized window used later for the fallback branch.
    """
    for form_index, form in enumerate(rule.forms):
        if start + form.arity > len(stmts):
            continue
        window = [copy.deepcopy(stmt) for stmt in stmts[start : start + form.arity]]
        st = _MatchState(holes=form.holes, signatures=rule.signatures, bound={})
        try:
            if form.shell is ShellMode.EXPRESSION:
                subject = window[0]
                if isinstance(subject, (ast.Expr, ast.Assign)):
                    _match_node(form.statements[0].value, subject.value, st)
                else:
                    raise _FAIL
            else:
                for pat_stmt, sub_stmt in zip(form.statements, window):
                    _match_node(pat_stmt, sub_stmt, st)
        except MatchFailed:
            continue
        return Bindings(
            values=st.bound,
            start=start,
            arity=form.arity,
            normalized=window,
            form_index=form_index,
        )
    return None


def check_syntactic(rule: RewriteRule, bindings: Bindings) -> bool:
    return all(prec.holds(bindings.values) for prec in rule.sprecs)


def statement_names(stmt: ast.stmt) -> frozenset[str]:
    names: set[str] = set()
    for node in ast.walk(stmt):
        if isinstance(node, ast.Name):
            names.add(node.id)
        elif isinstance(node, ast.Attribute):
            names.add(node.attr)
    return frozenset(names)


def dispatch(stmt: ast.stmt, rules: Sequence[RewriteRule]) -> list[RewriteRule]:
    """Superset filter over the registry: every rule that could match the
    statement survives; rules whose anchor names are absent drop out without
    deep matching."""
    present = statement_names(stmt)
    return [rule for rule in rules if rule.anchor.admits(stmt, present)]


_NESTED_BLOCK_FIELDS = ("body", "orelse", "finalbody")
_NESTED_GROUP_FIELDS = ("handlers", "cases")


def scan_cell(
    cell: ParsedCell,
    registry: Registry,
    history: str = "",
) -> list[RuleMatch]:
    """Greedy left-to-right scan over the cell's statement lists.

    Windows are claimed in registry priority order and never overlap; claimed
    statements are not descended into.  Scanning recurses into nested bodies
    (loops, conditionals, function definitions, try/with/match blocks).
    """
    rules = registry.active()
    matches: list[RuleMatch] = []

    def eligible(stmts: Sequence[ast.stmt], start: int, arity: int) -> bool:
        first, last = stmts[start], stmts[start + arity - 1]
        first_line, _ = cell.lines_of(first)
        _, last_line = cell.lines_of(last)
        s0, _ = cell.span(first)
        _, e1 = cell.span(last)
        # nothing but indentation before the window on its first line
        if cell.text[cell.line_start(first_line) : s0].strip():
            return False
        # nothing but whitespace or a comment after it on its last line
        tail = cell.text[e1 : cell.line_end(last_line)].lstrip()
        if tail and not tail.startswith("#"):
            return False
        # sentinel-bearing windows are never rewritten (idempotence)
        if RESERVED_PREFIX in cell.text[cell.line_start(first_line) : e1]:
            return False
        return True

    def try_claim(
        stmts: list[ast.stmt],
        index: int,
        path: tuple[tuple[str, int], ...],
        list_field: str,
        top_index: int,
    ) -> RuleMatch | None:
        candidates = dispatch(stmts[index], rules)
        for rule in candidates:
            bindings = match_window(rule, stmts, index)
            if bindings is None:
                continue
            if not eligible(stmts, index, bindings.arity):
                continue
            if not check_syntactic(rule, bindings):
                continue
            form = rule.forms[bindings.form_index]
            deferred = None
            if isinstance(form.rhs, DeferredRhs):
                scope = ResolutionScope(cell=cell, history=history, top_index=top_index)
                deferred = form.rhs.analyze(bindings, scope)
                if deferred is None:
                    continue
            return RuleMatch(
                rule=rule,
                bindings=bindings,
                location=Location(
                    path=path,
                    list_field=list_field,
                    start=index,
                    arity=bindings.arity,
                    top_index=top_index,
                ),
                original=stmts[index : index + bindings.arity],
                deferred=deferred,
            )
        return None

    def scan_block(
        stmts: list[ast.stmt],
        path: tuple[tuple[str, int], ...],
        list_field: str,
        top_index: int | None,
    ) -> None:
        i = 0
        while i < len(stmts):
            top = top_index if top_index is not None else i
            claim = try_claim(stmts, i, path, list_field, top)
            if claim is not None:
                matches.append(claim)
                i += claim.location.arity
                continue
            descend(stmts[i], path + ((list_field, i),), top)
            i += 1

    def descend(stmt: ast.stmt, path: tuple[tuple[str, int], ...], top_index: int) -> None:
        for field_name in _NESTED_BLOCK_FIELDS:
            block = getattr(stmt, field_name, None)
            if isinstance(block, list) and block and all(isinstance(s, ast.stmt) for s in block):
                scan_block(block, path, field_name, top_index)
        for field_name in _NESTED_GROUP_FIELDS:
            group = getattr(stmt, field_name, None)
            if not isinstance(group, list):
                continue
            for idx, item in enumerate(group):
                block = getattr(item, "body", None)
                if isinstance(block, list) and block and all(isinstance(s, ast.stmt) for s in block):
                    scan_block(block, path + ((field_name, idx),), "body", top_index)

    scan_block(cell.module.body, (), "body", None)
    return matches
