"""Executor semantics across the three backends."""

import pytest

from tempcc.driver import CompileError, compile_source
from tempcc.vm import TrapCode, VmConfig, run_program

BACKENDS = ("inplace", "disjoint", "unchecked")


def run(src, backend="inplace", guest_input=(), **kw):
    cfg = VmConfig(backend=backend, **kw)
    prog = compile_source(src, backend=backend, key_bits=cfg.key_bits,
                          opt_checks=cfg.opt_checks)
    return run_program(prog, cfg, guest_input)


@pytest.mark.parametrize("backend", BACKENDS)
def test_arithmetic_and_io(backend):
    src = """
int main() {
    int a = read_int();
    int b = read_int();
    print_int(a + b * 2);
    print_int(a / b);
    print_int(a % b);
    print_int(-7 / 2);
    print_int(-7 % 2);
    return 0;
}
"""
    r = run(src, backend, guest_input=[17, 5])
    assert r.exit_code == 0
    assert r.output == "27\n3\n2\n-3\n-1\n"


@pytest.mark.parametrize("backend", BACKENDS)
def test_struct_field_access(backend):
    src = """
struct V { int x; int y; char c; };
int main() {
    mm_ptr<struct V> v = mm_alloc<struct V>(1);
    v->x = 10;
    v->y = 32;
    v->c = 'A';
    print_int(v->x + v->y);
    print_int(v->c);
    mm_free(v);
    return 0;
}
"""
    r = run(src, backend)
    assert r.exit_code == 0
    assert r.output == "42\n65\n"


@pytest.mark.parametrize("backend", BACKENDS)
def test_globals_and_strings(backend):
    src = """
int counter = 5;
int main() {
    counter = counter + 1;
    print_int(counter);
    mm_array_ptr<char> s = "hi there";
    print_str(s);
    return 0;
}
"""
    r = run(src, backend)
    assert r.exit_code == 0
    assert r.output == "6\nhi there\n"


@pytest.mark.parametrize("backend", BACKENDS)
def test_vla_and_locals(backend):
    src = """
int sumv(int n) {
    int v[n];
    int i = 0;
    while (i < n) { v[i] = i * i; i = i + 1; }
    int s = 0;
    i = 0;
    while (i < n) { s = s + v[i]; i = i + 1; }
    return s;
}
int main() {
    print_int(sumv(5));
    print_int(sumv(3));
    return 0;
}
"""
    r = run(src, backend)
    assert r.exit_code == 0
    assert r.output == "30\n5\n"


@pytest.mark.parametrize("backend", ("inplace", "disjoint"))
def test_uaf_traps_with_line(backend):
    src = """int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_free(p);
    return *p;
}
"""
    r = run(src, backend)
    assert r.exit_code == int(TrapCode.UAF) == 11
    assert r.trap.line == 4


def test_unchecked_backend_does_not_trap():
    src = """int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 3;
    mm_free(p);
    return 0;
}
"""
    r = run(src, "unchecked")
    assert r.exit_code == 0
    assert r.stats.key_checks_exec == 0
    assert r.stats.meta_loads == 0 and r.stats.meta_stores == 0


@pytest.mark.parametrize("backend", ("inplace", "disjoint"))
def test_free_then_lock_reads_invalid(backend):
    # after a free the lock word must hold INVALID_KEY, so a fresh check
    # through a stale pointer trips immediately
    src = """int main() {
    mm_array_ptr<int> a = mm_alloc<int>(2);
    a[1] = 1;
    mm_free(a);
    return a[1];
}
"""
    r = run(src, backend)
    assert r.exit_code == 11


@pytest.mark.parametrize("backend", ("inplace", "disjoint"))
def test_free_order_interior_before_double(backend):
    # interior frees report INVALID_FREE even if the object is long dead
    src = """int main() {
    mm_array_ptr<int> a = mm_alloc<int>(4);
    mm_free(a + 1);
    return 0;
}
"""
    r = run(src, backend)
    assert r.exit_code == int(TrapCode.INVALID_FREE) == 13

    src2 = """int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_free(p);
    mm_free(p);
    return 0;
}
"""
    r2 = run(src2, backend)
    assert r2.exit_code == int(TrapCode.DOUBLE_FREE) == 12


def test_null_deref_traps():
    src = """int main() {
    mm_ptr<int> p = 0;
    return *p;
}
"""
    r = run(src, "inplace")
    assert r.exit_code == 11


@pytest.mark.parametrize("backend", ("inplace", "disjoint"))
def test_object_too_large(backend):
    src = """int main() {
    mm_array_ptr<char> a = mm_alloc<char>(16777216);
    return 0;
}
"""
    r = run(src, backend, key_bits=40)
    assert r.exit_code == int(TrapCode.OBJECT_TOO_LARGE) == 14

    src_ok = """int main() {
    mm_array_ptr<char> a = mm_alloc<char>(16777215);
    a[16777214] = 'x';
    print_int(a[16777214]);
    mm_free(a);
    return 0;
}
"""
    r2 = run(src_ok, backend, key_bits=40)
    assert r2.exit_code == 0
    assert r2.output == "120\n"


def test_out_of_memory():
    src = """int main() {
    int i = 0;
    while (i < 100) {
        mm_array_ptr<char> a = mm_alloc<char>(1048576);
        i = i + 1;
    }
    return 0;
}
"""
    r = run(src, "inplace", heap_size=1 << 20)
    assert r.exit_code == int(TrapCode.OUT_OF_MEMORY) == 16


def test_compile_error_is_not_a_run():
    with pytest.raises(CompileError):
        compile_source("int main() { return q; }")


@pytest.mark.parametrize("backend", BACKENDS)
def test_output_identical_across_backends_and_opt(backend):
    src = """
struct N { mm_ptr<struct N> next; int v; };
int main() {
    mm_ptr<struct N> h = 0;
    int i = 0;
    while (i < 8) {
        mm_ptr<struct N> n = mm_alloc<struct N>(1);
        n->v = i * 3;
        n->next = h;
        h = n;
        i = i + 1;
    }
    int s = 0;
    while (h != 0) {
        s = s + h->v;
        mm_ptr<struct N> d = h;
        h = h->next;
        mm_free(d);
    }
    print_int(s);
    return 0;
}
"""
    outs = {run(src, backend, opt_checks=o).output for o in (False, True)}
    assert outs == {"84\n"}


def test_seed_changes_keys_not_behavior():
    src = """int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 9;
    print_int(*p);
    mm_free(p);
    return 0;
}
"""
    r1 = run(src, "inplace", seed=1)
    r2 = run(src, "inplace", seed=999)
    assert r1.exit_code == r2.exit_code == 0
    assert r1.output == r2.output
    assert r1.stats.to_dict() == r2.stats.to_dict()


def test_stats_json_shape():
    src = "int main() { print_int(1); return 0; }"
    d = run(src, "inplace").stats.to_dict()
    for k in ("instrCount", "keyChecksExec", "metaLoads", "metaStores",
              "allocCount", "freeCount", "heapBytesPayload",
              "heapBytesMetadata", "peakLiveBytes", "perFunction"):
        assert k in d
    assert d["instrCount"] > 0
