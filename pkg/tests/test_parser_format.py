"""Parser and pretty-printer: precedence, round-trip stability."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempcc import ast
from tempcc.parser import SyntaxError_, parse
from tempcc.printer import format_program


def parse_expr(text):
    prog = parse("int main() { x = %s; return 0; }" % text)
    stmt = prog.funcs[0].body.stmts[0]
    return stmt.expr.value


def test_postfix_binds_tighter_than_unary():
    e = parse_expr("*p->next")
    assert isinstance(e, ast.Unary) and e.op == "*"
    assert isinstance(e.operand, ast.Field) and e.operand.arrow


def test_addr_of_index():
    e = parse_expr("&a[2]")
    assert isinstance(e, ast.Unary) and e.op == "&"
    assert isinstance(e.operand, ast.Index)


def test_mul_over_add():
    e = parse_expr("a + b * c")
    assert isinstance(e, ast.Bin) and e.op == "+"
    assert isinstance(e.right, ast.Bin) and e.right.op == "*"


def test_assign_right_assoc():
    prog = parse("int main() { a = b = 1; return 0; }")
    e = prog.funcs[0].body.stmts[0].expr
    assert isinstance(e, ast.Assign)
    assert isinstance(e.value, ast.Assign)


def test_cast_vs_paren_expr():
    e = parse_expr("(int)x")
    assert isinstance(e, ast.Cast)
    e = parse_expr("(x)")
    assert isinstance(e, ast.Ident)


def test_missing_semi_is_syntax_error():
    with pytest.raises(SyntaxError_):
        parse("int main() { x = 1 return 0; }")


ROUND_TRIP_SOURCES = [
    "int g = 3;\nint main() { return g; }",
    """
struct Node { mm_ptr<struct Node> next; int val; };
mm_ptr<struct Node> mk(int v) {
    mm_ptr<struct Node> n = mm_alloc<struct Node>(1);
    n->val = v;
    return n;
}
int main() {
    mm_ptr<struct Node> p = mk(3);
    int x = *&p->val;
    if (x > 2) { print_int(x); } else { print_int(0); }
    mm_free(p);
    return 0;
}
""",
    """
unchecked int raw(int* q, int n) {
    int i = 0;
    while (i < n) { q[i] = q[i] * 2; i = i + 1; }
    return q[0];
}
int main() {
    mm_array_ptr<char> s = "hi";
    print_str(s);
    int v[3];
    v[0] = 1;
    return v[0];
}
""",
    "int main() { int a = -1 * 2 + 3 % 4; return (a == 1) != 0; }",
]


@pytest.mark.parametrize("src", ROUND_TRIP_SOURCES)
def test_format_round_trip(src):
    p1 = parse(src)
    text = format_program(p1)
    p2 = parse(text)
    assert ast.ast_equal(p1, p2)
    # and formatting is a fixpoint
    assert format_program(p2) == text


# random expression generator for the round-trip property

names = st.sampled_from(["a", "b", "p", "q"])


def exprs():
    leaf = st.one_of(st.integers(0, 999).map(str), names)
    def extend(inner):
        return st.one_of(
            st.tuples(st.sampled_from(["+", "-", "*", "/", "%", "==", "<"]),
                      inner, inner).map(lambda t: f"({t[1]} {t[0]} {t[2]})"),
            st.tuples(inner, inner).map(lambda t: f"{t[0]}[{t[1]}]"),
            inner.map(lambda s: f"(-{s})"),
            inner.map(lambda s: f"(*{s})"),
        )
    return st.recursive(leaf, extend, max_leaves=12)


@settings(max_examples=150, deadline=None)
@given(exprs())
def test_random_expr_round_trip(text):
    src = "int main() { x = %s; return 0; }" % text
    p1 = parse(src)
    out = format_program(p1)
    p2 = parse(out)
    assert ast.ast_equal(p1, p2)
