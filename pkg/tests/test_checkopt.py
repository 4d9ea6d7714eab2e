"""Redundant key-check elimination: soundness and effectiveness."""

from tempcc import tir
from tempcc.checkopt import optimize_checks
from tempcc.driver import compile_source
from tempcc.vm import VmConfig, run_program


def counts(src, backend="inplace", opt=True, guest_input=()):
    prog = compile_source(src, backend=backend, opt_checks=opt)
    r = run_program(prog, VmConfig(backend=backend, opt_checks=opt),
                    guest_input)
    return r


def static_checks(prog):
    return sum(1 for f in prog.funcs.values() for b in f.blocks for i in b
               if isinstance(i, tir.KeyCheck))


def test_straight_line_duplicates_elided():
    src = """
struct P { int a; int b; };
int main() {
    mm_ptr<struct P> p = mm_alloc<struct P>(1);
    p->a = 1;
    p->b = 2;
    int x = p->a + p->b;
    print_int(x);
    return 0;
}
"""
    unopt = counts(src, opt=False)
    opt = counts(src, opt=True)
    assert opt.output == unopt.output == "3\n"
    assert opt.stats.key_checks_exec == 1
    assert unopt.stats.key_checks_exec == 4
    assert opt.stats.key_checks_elided_static == 3


def test_call_kills_facts():
    src = """
int id(int x) { return x; }
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 1;
    int y = id(2);
    int z = *p;
    print_int(y + z);
    return 0;
}
"""
    r = counts(src, opt=True)
    # the check after the call must survive: the callee could have freed p
    assert r.stats.key_checks_exec == 2


def test_free_kills_facts_keeps_detection():
    src = """
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 1;
    mm_free(p);
    int x = *p;
    print_int(x);
    return 0;
}
"""
    unopt = counts(src, opt=False)
    opt = counts(src, opt=True)
    assert unopt.exit_code == opt.exit_code == 11
    assert unopt.trap.line == opt.trap.line


def test_reassignment_kills_fact():
    src = """
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 1;
    p = mm_alloc<int>(1);
    int x = *p;
    print_int(x);
    return 0;
}
"""
    r = counts(src, opt=True)
    assert r.stats.key_checks_exec == 2


def test_loop_check_not_hoisted_without_hint():
    src = """
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    int i = 0;
    int s = 0;
    while (i < 10) {
        s = s + *p;
        mm_free(p);
        p = mm_alloc<int>(1);
        i = i + 1;
    }
    print_int(s);
    return 0;
}
"""
    r = counts(src, opt=True)
    assert r.exit_code == 0
    assert r.stats.key_checks_exec == 10


def test_loop_invariant_check_elided_after_first_trip():
    src = """
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 2;
    int i = 0;
    int s = 0;
    while (i < 100) {
        s = s + *p;
        i = i + 1;
    }
    print_int(s);
    return 0;
}
"""
    r = counts(src, opt=True)
    # the fact established before the loop flows around the back edge
    assert r.stats.key_checks_exec == 1
    assert r.output == "200\n"


def test_store_through_raw_pointer_kills_all():
    src = """
unchecked int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 5;
    int x = 0;
    int* r = &x;
    *r = 1;
    int y = *p;
    print_int(y);
    return 0;
}
"""
    r = counts(src, opt=True)
    assert r.stats.key_checks_exec == 2


def test_optimizer_idempotent():
    src = """
int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    *p = 1;
    int x = *p + *p;
    print_int(x);
    return 0;
}
"""
    prog = compile_source(src, opt_checks=True)
    once = static_checks(prog)
    again = optimize_checks(prog)
    assert static_checks(again) == once
