"""Assignability rules and diagnostic coverage."""

import pytest

from tempcc.typecheck import assignable, check_program
from tempcc.parser import parse
from tempcc.types import CharT, IntT, MmArrayPtrT, MmPtrT, RawPtrT


def errors_of(src):
    tp = check_program(parse(src))
    return [(e.kind, e.span.line) for e in tp.errors]


INT = IntT()
CHAR = CharT()


@pytest.mark.parametrize("dst,src,ctx,want", [
    (INT, INT, "checked", True),
    (INT, CHAR, "checked", True),          # widening
    (CHAR, INT, "checked", False),         # narrowing needs a cast
    (MmPtrT(INT), MmPtrT(INT), "checked", True),
    (MmPtrT(INT), MmArrayPtrT(INT), "checked", False),
    (MmPtrT(INT), RawPtrT(INT), "checked", False),   # raw -> checked never
    (MmPtrT(INT), RawPtrT(INT), "unchecked", False),
    (RawPtrT(INT), MmPtrT(INT), "checked", False),
    (RawPtrT(INT), MmPtrT(INT), "unchecked", True),  # demotion, same pointee
    (RawPtrT(INT), MmArrayPtrT(INT), "unchecked", True),
    (RawPtrT(CHAR), MmPtrT(INT), "unchecked", False),
])
def test_assignable_matrix(dst, src, ctx, want):
    assert assignable(dst, src, ctx) is want


def test_raw_to_checked_rejected():
    errs = errors_of("""
unchecked int main() {
    int x = 0;
    int* r = &x;
    mm_ptr<int> p = r;
    return 0;
}
""")
    assert ("RawToChecked", 5) in errs


def test_arith_on_mm_ptr_rejected():
    errs = errors_of("""
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_ptr<int> q = p + 1;
    return 0;
}
""")
    assert any(k == "ArithOnMmPtr" for k, _ in errs)


def test_array_ptr_arith_ok():
    errs = errors_of("""
int main() {
    mm_array_ptr<int> a = mm_alloc<int>(4);
    mm_array_ptr<int> b = a + 2;
    return b[0];
}
""")
    assert errs == []


def test_hint_in_checked_fn_rejected():
    errs = errors_of("""
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_checked(p);
    return 0;
}
""")
    assert any(k == "CheckedOpInCheckedFn" for k, _ in errs)


def test_free_of_raw_rejected():
    errs = errors_of("""
unchecked int main() {
    int x = 0;
    int* r = &x;
    mm_free(r);
    return 0;
}
""")
    assert any(k == "BadFree" for k, _ in errs)


def test_checked_to_raw_flow_needs_unchecked_ctx():
    errs = errors_of("""
struct Holder { mm_ptr<int> p; };
unchecked void take(struct Holder* h) { return; }
int main() {
    mm_ptr<struct Holder> h = mm_alloc<struct Holder>(1);
    take(h);
    return 0;
}
""")
    assert ("CheckedOpInCheckedFn", 6) in errs


def test_marshal_required_for_fat_below_raw():
    errs = errors_of("""
struct Holder { mm_ptr<int> p; };
unchecked void take(struct Holder* h) { return; }
unchecked int main() {
    struct Holder h;
    take(&h);
    return 0;
}
""")
    assert any(k == "MarshalRequired" for k, _ in errs)


def test_all_errors_collected():
    errs = errors_of("""
int main() {
    mm_ptr<int> p = q;
    mm_ptr<int> r = p + 1;
    return 0;
}
""")
    assert len(errs) >= 2


def test_null_literal_for_pointers():
    errs = errors_of("""
int main() {
    mm_ptr<int> p = 0;
    if (p == 0) { return 1; }
    return 0;
}
""")
    assert errs == []


def test_string_literal_checked_vs_unchecked():
    assert errors_of("""
int main() { mm_array_ptr<char> s = "ok"; print_str(s); return 0; }
""") == []
    assert errors_of("""
unchecked int helper() { char* s = "ok"; return 0; }
int main() { return 0; }
""") == []
