import ast

import pytest
from hypothesis import given, strategies as st

from cellrw.syntax import (
    RESERVED_PREFIX,
    CellParseError,
    FreshNamePool,
    harvest_identifiers,
    identifiers_in,
    parse_cell,
    resolve_path,
    structurally_equal,
    unparse_block,
    walk_statement_lists,
)


def test_parse_cell_keeps_text_and_module():
    src = "x = 1\ny = x + 2\n"
    cell = parse_cell(src)
    assert cell.text is src
    assert len(cell.module.body) == 2


def test_parse_cell_rejects_magics_with_position():
    with pytest.raises(CellParseError) as exc:
        parse_cell("x = 1\n%matplotlib inline\n")
    assert exc.value.line == 2


def test_parse_cell_rejects_shell_escape():
    with pytest.raises(CellParseError):
        parse_cell("!pip install foo\n")


def test_span_covers_statement_with_multiline_expression():
    src = "x = (1 +\n     2)\nprint(x)\n"
    cell = parse_cell(src)
    start, end = cell.span(cell.module.body[0])
    assert cell.text[start:end] == "x = (1 +\n     2)"


def test_segment_of_nested_statement():
    src = "if a:\n    b = c.method()\n"
    cell = parse_cell(src)
    inner = cell.module.body[0].body[0]
    assert cell.segment(inner) == "b = c.method()"


def test_lines_of_are_one_based_inclusive():
    src = "a = 1\nif a:\n    b = 2\n    c = 3\n"
    cell = parse_cell(src)
    assert cell.lines_of(cell.module.body[0]) == (1, 1)
    assert cell.lines_of(cell.module.body[1]) == (2, 4)


def test_offset_at_counts_bytes_for_nonascii():
    src = "s = 'caf\u00e9'\nt = 2\n"
    cell = parse_cell(src)
    start, end = cell.span(cell.module.body[1])
    assert cell.text[start:end] == "t = 2"


def test_line_start_and_end():
    src = "aa = 1\nbb = 2\n"
    cell = parse_cell(src)
    assert cell.line_start(2) == len("aa = 1\n")
    assert cell.line_end(2) == len("aa = 1\nbb = 2")
    assert src[cell.line_start(1):cell.line_end(1)] == "aa = 1"


def test_unparse_block_round_trips_structure():
    src = "for i in xs:\n    total += i\n"
    cell = parse_cell(src)
    text = unparse_block(cell.module.body)
    again = ast.parse(text)
    assert structurally_equal(cell.module, again)


def test_structurally_equal_ignores_formatting_not_values():
    a = ast.parse("x=f( 1 , 2 )")
    b = ast.parse("x = f(1, 2)")
    c = ast.parse("x = f(1, 3)")
    assert structurally_equal(a, b)
    assert not structurally_equal(a, c)


def test_identifiers_in_collects_all_name_ids():
    tree = ast.parse("a = b.c(d[e], key=f)")
    names = identifiers_in(tree)
    assert {"a", "b", "d", "e", "f"} <= names


def test_harvest_identifiers_is_superset_of_ast_names():
    src = "alpha = beta + 1\n%magic gamma\n"
    names = harvest_identifiers(src)
    assert {"alpha", "beta", "gamma"} <= names


def test_fresh_name_pool_prefixes_and_uniquifies():
    pool = FreshNamePool(forbidden={"x", RESERVED_PREFIX + "x"})
    first = pool.fresh("x")
    second = pool.fresh("x")
    assert first.startswith(RESERVED_PREFIX)
    assert first != RESERVED_PREFIX + "x"
    assert second != first


def test_fresh_name_pool_avoids_forbidden_and_own_output():
    pool = FreshNamePool(forbidden=set())
    seen = {pool.fresh("t") for _ in range(10)}
    assert len(seen) == 10


@given(st.lists(st.sampled_from(["a", "b", "ls", "it"]), max_size=8))
def test_fresh_names_never_collide_with_forbidden(bases):
    forbidden = {"a", "b", "ls", "it", RESERVED_PREFIX + "ls"}
    pool = FreshNamePool(forbidden=forbidden)
    out = [pool.fresh(b) for b in bases]
    assert not (set(out) & forbidden)
    assert len(set(out)) == len(out)


_SIMPLE_EXPRS = st.recursive(
    st.sampled_from(["x", "y", "1", "'s'"]),
    lambda inner: st.tuples(inner, inner).map(lambda p: f"({p[0]} + {p[1]})"),
    max_leaves=6,
)


@given(_SIMPLE_EXPRS)
def test_unparse_reparse_is_structurally_stable(expr):
    src = f"out = {expr}\n"
    cell = parse_cell(src)
    text = unparse_block(cell.module.body)
    assert structurally_equal(ast.parse(text), cell.module)


def test_walk_statement_lists_visits_nested_bodies():
    src = "if a:\n    x = 1\nelse:\n    y = 2\nfor i in z:\n    w = 3\n"
    cell = parse_cell(src)
    fields = [(path, field) for path, field, _ in walk_statement_lists(cell.module)]
    assert ((), "body") in fields
    assert any(field == "orelse" for _, field in fields)


def test_resolve_path_round_trips_with_walker():
    src = "if a:\n    if b:\n        x = 1\n"
    cell = parse_cell(src)
    for path, field, stmts in walk_statement_lists(cell.module):
        assert resolve_path(cell.module, path, field) is stmts
