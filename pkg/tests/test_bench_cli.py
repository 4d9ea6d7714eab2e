"""Benchmark reporting and command-line plumbing."""

import csv
import json

from tempcc.bench import expected_trap, run_bench_suite
from tempcc.cli import main
from tempcc.vm import TrapCode

EXPECTED_COLUMNS = ["benchmark", "backend", "opt", "instrCount",
                    "keyChecksExec", "metaLoads", "metaStores",
                    "payloadBytes", "metadataBytes", "overhead_instr",
                    "overhead_mem"]


def test_bench_report_shape(tmp_path):
    rc = run_bench_suite(str(tmp_path), benchmarks=["list-mini"])
    assert rc == 0
    with open(tmp_path / "bench.csv") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0].keys()) == EXPECTED_COLUMNS
    assert len(rows) == 6  # 3 backends x opt on/off
    by_mode = {(r["backend"], r["opt"]): r for r in rows}
    assert float(by_mode[("unchecked", "1")]["overhead_instr"]) == 0.0
    ip = float(by_mode[("inplace", "1")]["overhead_instr"])
    dj = float(by_mode[("disjoint", "1")]["overhead_instr"])
    assert 0 < ip < dj
    report = json.loads((tmp_path / "bench.json").read_text())
    assert "summary" in report and "rows" in report


def test_bench_deterministic(tmp_path):
    run_bench_suite(str(tmp_path / "a"), benchmarks=["treeadd-mini"], seed=5)
    run_bench_suite(str(tmp_path / "b"), benchmarks=["treeadd-mini"], seed=5)
    assert (tmp_path / "a" / "bench.csv").read_text() == \
           (tmp_path / "b" / "bench.csv").read_text()


def test_trap_marker_parsing():
    code, line = expected_trap("int x;\n// TRAP: double-free\n")
    assert code == TrapCode.DOUBLE_FREE and line == 2


def test_cli_run_and_stats(tmp_path):
    prog = tmp_path / "p.mcc"
    prog.write_text("int main() { print_int(41 + 1); return 0; }\n")
    stats = tmp_path / "s.json"
    rc = main(["run", str(prog), "--backend", "disjoint",
               "--stats", str(stats)])
    assert rc == 0
    d = json.loads(stats.read_text())
    assert d["instrCount"] > 0


def test_cli_compile_error_exit_2(tmp_path):
    prog = tmp_path / "bad.mcc"
    prog.write_text("int main() { return nope; }\n")
    assert main(["run", str(prog)]) == 2


def test_cli_trap_exit_code(tmp_path):
    prog = tmp_path / "uaf.mcc"
    prog.write_text("""int main() {
    mm_ptr<int> p = mm_alloc<int>(1);
    mm_free(p);
    return *p;
}
""")
    assert main(["run", str(prog)]) == 11


def test_cli_corpus_green():
    assert main(["corpus"]) == 0
