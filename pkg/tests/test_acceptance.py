"""Acceptance gate: one test per criterion, each at its stated tolerance."""

import pytest

from tempcc import bench
from tempcc.driver import compile_source
from tempcc.fuzz import run_fuzz
from tempcc.mem import HEAP_BASE, KeyGen, LOCK_ARENA_BASE
from tempcc.tir import HEADER_SIZE
from tempcc.vm import VM, TrapCode, VmConfig, run_program

N = 10_000
K = 1_000


def run_guest(kind, name, backend, opt=True, key_bits=32, seed=0,
              guest_input=()):
    return bench.run_one(name, backend, opt, key_bits, seed, kind=kind,
                         guest_input=guest_input)


def run_src(src, backend, opt=True, key_bits=32, seed=0, guest_input=(),
            oracle=False):
    prog = compile_source(src, backend=backend, key_bits=key_bits,
                          opt_checks=opt)
    cfg = VmConfig(backend=backend, key_bits=key_bits, seed=seed,
                   opt_checks=opt, oracle=oracle)
    return run_program(prog, cfg, guest_input)


def test_criterion_01_deref_micro_check_meta_loads_exact():
    # N checked dereferences cost exactly N meta loads in-place, 4N disjoint
    ip = run_guest("micro", "deref-micro", "inplace", opt=False)
    dj = run_guest("micro", "deref-micro", "disjoint", opt=False)
    assert ip.exit_code == dj.exit_code == 0
    assert ip.stats.key_checks_exec == N
    assert dj.stats.key_checks_exec == N
    assert ip.stats.meta_loads == N
    assert dj.stats.meta_loads == 4 * N


def test_criterion_02_fat_store_metadata_growth_exact():
    # storing K fat pointers: 8K extra bytes in-place; the disjoint table
    # grows by exactly 16K entry bytes.  Measured as a delta between two
    # runs of the identical program (K stores vs none).
    ip_k = run_guest("micro", "fatstore-micro", "inplace", guest_input=[K])
    ip_0 = run_guest("micro", "fatstore-micro", "inplace", guest_input=[0])
    assert ip_k.exit_code == ip_0.exit_code == 0
    assert ip_k.stats.fat_slot_bytes - ip_0.stats.fat_slot_bytes == 8 * K
    assert ip_k.stats.meta_stores - ip_0.stats.meta_stores == K

    dj_k = run_guest("micro", "fatstore-micro", "disjoint", guest_input=[K])
    dj_0 = run_guest("micro", "fatstore-micro", "disjoint", guest_input=[0])
    assert dj_k.stats.table_entry_bytes - dj_0.stats.table_entry_bytes == 16 * K


def test_criterion_03_overheads_strictly_ordered():
    for name in bench.BENCHMARKS:
        for opt in (False, True):
            un = run_guest("bench", name, "unchecked", opt)
            ip = run_guest("bench", name, "inplace", opt)
            dj = run_guest("bench", name, "disjoint", opt)
            assert un.exit_code == ip.exit_code == dj.exit_code == 0, name
            assert un.output == ip.output == dj.output, name
            base_i = un.stats.instr_count
            oi_ip = ip.stats.instr_count / base_i - 1
            oi_dj = dj.stats.instr_count / base_i - 1
            assert 0 < oi_ip < oi_dj, (name, opt, oi_ip, oi_dj)
            base_m = un.stats.heap_bytes_payload
            om_ip = bench.metadata_bytes(ip.stats, "inplace") / base_m
            om_dj = bench.metadata_bytes(dj.stats, "disjoint") / base_m
            assert 0 < om_ip < om_dj, (name, opt, om_ip, om_dj)


def test_criterion_04_bug_corpus_exact_traps_no_divergence():
    names = bench.corpus_names()
    assert len(names) >= 12
    assert bench.run_corpus(key_bits=32, seed=0, oracle=True,
                            verbose=False) == 0


@pytest.mark.parametrize("backend", ("inplace", "disjoint"))
def test_criterion_05_free_semantics_and_lock_invalidation(backend):
    interior = """int main() {
    mm_array_ptr<int> a = mm_alloc<int>(4);
    mm_free(a + 2);
    return 0;
}
"""
    assert run_src(interior, backend).exit_code == int(TrapCode.INVALID_FREE)

    double = """int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_free(p);
    mm_free(p);
    return 0;
}
"""
    assert run_src(double, backend).exit_code == int(TrapCode.DOUBLE_FREE)

    # post-free, the lock word itself must read 0
    src = """int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_free(p);
    return 0;
}
"""
    prog = compile_source(src, backend=backend)
    vm = VM(prog, VmConfig(backend=backend))
    if backend == "inplace":
        lock_addr = HEAP_BASE + HEADER_SIZE - 8  # first block's lock word
    else:
        # next arena slot handed out (the slots before it hold global locks)
        lock_addr = vm.arena.bump
        assert lock_addr >= LOCK_ARENA_BASE
    assert vm.run().exit_code == 0
    assert vm.mem.read64(lock_addr) == 0


def test_criterion_06_key_bits_8_stress():
    # 1000 allocations at keyBits=8 wrap the key space without ever
    # issuing a reserved key; global locks still read GLOBAL_KEY
    src = """
int gvar = 7;
int main() {
    mm_array_ptr<char> s = "g";
    int i = 0;
    int acc = 0;
    while (i < 1000) {
        mm_ptr<int> p = mm_alloc<int>(1);
        *p = i;
        acc = acc + *p;
        mm_free(p);
        i = i + 1;
    }
    print_int(acc + gvar);
    print_str(s);
    return 0;
}
"""
    for seed in (0, 42):
        prog = compile_source(src, backend="inplace", key_bits=8)
        vm = VM(prog, VmConfig(backend="inplace", key_bits=8, seed=seed))
        r = vm.run()
        assert r.exit_code == 0
        assert r.output == "499507\ng\n"
        # the vm consumed exactly alloc_count keys; replay the generator
        kg = KeyGen(8, seed)
        keys = [kg.next() for _ in range(r.stats.alloc_count)]
        assert all(k >= 2 for k in keys)
        # pooled string lock still holds the global key
        assert vm.mem.read64(vm.string_addr[0] - 8) == 1


@pytest.mark.parametrize("backend", ("inplace", "disjoint"))
def test_criterion_07_key_bits_40_offset_ceiling(backend):
    too_big = """int main() {
    mm_array_ptr<char> a = mm_alloc<char>(16777216);
    return 0;
}
"""
    r = run_src(too_big, backend, key_bits=40)
    assert r.exit_code == int(TrapCode.OBJECT_TOO_LARGE)

    just_fits = """int main() {
    mm_array_ptr<char> a = mm_alloc<char>(16777215);
    a[16777214] = 'y';
    print_int(a[16777214]);
    mm_free(a);
    return 0;
}
"""
    r2 = run_src(just_fits, backend, key_bits=40)
    assert r2.exit_code == 0
    assert r2.output == "121\n"


def test_criterion_08_optimizer_preserves_behavior_and_hints_pay_off():
    # behavior identical with and without optimization, including trap sites
    for kind, names in (("bench", bench.BENCHMARKS),
                        ("bugs", bench.corpus_names())):
        for name in names:
            for backend in ("inplace", "disjoint"):
                a = run_guest(kind, name, backend, opt=False)
                b = run_guest(kind, name, backend, opt=True)
                assert a.exit_code == b.exit_code, (name, backend)
                assert a.output == b.output, (name, backend)
                la = a.trap.line if a.trap else None
                lb = b.trap.line if b.trap else None
                assert la == lb, (name, backend)
    # a single hint ahead of a hot loop removes >= 90% of dynamic checks
    off = run_guest("micro", "hint-micro", "inplace", opt=False)
    on = run_guest("micro", "hint-micro", "inplace", opt=True)
    assert off.output == on.output
    assert on.stats.key_checks_exec <= 0.1 * off.stats.key_checks_exec


def test_criterion_09_fuzz_offset_invariant_holds():
    res = run_fuzz(count=1000, backend="inplace", key_bits=32, seed_base=0)
    assert res["count"] == 1000
    assert res["violations"] == 0
    assert res["traps"] == 0
    assert res["keyChecks"] > 0


def test_criterion_10_marshal_round_trip_and_forgery():
    for backend in ("inplace", "disjoint"):
        r = run_guest("bench", "qsort-marshal-mini", backend)
        assert r.exit_code == 0
        assert r.output.startswith("1\n")  # 256 elements verified sorted
        f = run_guest("bugs", "marshal-forge", backend)
        assert f.exit_code == int(TrapCode.MARSHAL_ERROR)
