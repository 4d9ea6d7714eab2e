"""Benchmark suite and bug-corpus drivers with CSV / JSON reporting."""

from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass
from importlib import resources

from .driver import compile_source
from .vm import Stats, TrapCode, VmConfig, run_program

BENCHMARKS = [
    "treeadd-mini",
    "list-mini",
    "bisort-mini",
    "graph-relax-mini",
    "qsort-marshal-mini",
]

TRAP_BY_MARKER = {
    "uaf": TrapCode.UAF,
    "double-free": TrapCode.DOUBLE_FREE,
    "invalid-free": TrapCode.INVALID_FREE,
    "marshal": TrapCode.MARSHAL_ERROR,
}

_MARKER_RE = re.compile(r"//\s*TRAP:\s*([a-z-]+)")


def guest_dir(kind: str):
    return resources.files("tempcc").joinpath("guest", kind)


def load_guest(kind: str, name: str) -> str:
    return guest_dir(kind).joinpath(name + ".mcc").read_text()


def corpus_names() -> list[str]:
    names = [p.name[:-4] for p in guest_dir("bugs").iterdir()
             if p.name.endswith(".mcc")]
    return sorted(names)


def expected_trap(src: str) -> tuple[TrapCode, int]:
    """Scan a corpus program for its `// TRAP: kind` marker line."""
    for lineno, line in enumerate(src.splitlines(), start=1):
        m = _MARKER_RE.search(line)
        if m:
            return TRAP_BY_MARKER[m.group(1)], lineno
    raise ValueError("corpus program has no TRAP marker")


def metadata_bytes(stats: Stats, backend: str) -> int:
    """Total metadata footprint under each scheme.

    In-place: per-object headers plus one 8-byte meta word per distinct fat
    slot.  Disjoint: per-object arena locks plus committed trie leaf pages
    (the trie commits whole pages, which is where its footprint goes)."""
    if backend == "inplace":
        return stats.heap_bytes_metadata + stats.fat_slot_bytes
    if backend == "disjoint":
        return stats.heap_bytes_metadata + stats.table_page_bytes
    return 0


@dataclass
class BenchRow:
    benchmark: str
    backend: str
    opt: bool
    stats: Stats

    def record(self, base: Stats) -> dict:
        payload = base.heap_bytes_payload
        meta = metadata_bytes(self.stats, self.backend)
        return {
            "benchmark": self.benchmark,
            "backend": self.backend,
            "opt": int(self.opt),
            "instrCount": self.stats.instr_count,
            "keyChecksExec": self.stats.key_checks_exec,
            "metaLoads": self.stats.meta_loads,
            "metaStores": self.stats.meta_stores,
            "payloadBytes": payload,
            "metadataBytes": meta,
            "overhead_instr": round(
                self.stats.instr_count / base.instr_count - 1.0, 6),
            "overhead_mem": round(meta / payload, 6) if payload else 0.0,
        }


def run_one(name: str, backend: str, opt: bool, key_bits: int, seed: int,
            kind: str = "bench", guest_input=()):
    src = load_guest(kind, name)
    prog = compile_source(src, backend=backend, key_bits=key_bits,
                          opt_checks=opt)
    cfg = VmConfig(backend=backend, key_bits=key_bits, seed=seed,
                   opt_checks=opt)
    return run_program(prog, cfg, guest_input)


def run_bench_suite(out_dir: str, key_bits: int = 32, seed: int = 0,
                    benchmarks=None) -> int:
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    summary = {}
    for name in benchmarks or BENCHMARKS:
        results = {}
        for backend in ("unchecked", "inplace", "disjoint"):
            for opt in (False, True):
                r = run_one(name, backend, opt, key_bits, seed)
                if r.exit_code != 0:
                    print(f"bench {name} [{backend} opt={opt}] "
                          f"exited {r.exit_code}; aborting")
                    return 1
                results[(backend, opt)] = r
        outputs = {r.output for r in results.values()}
        if len(outputs) != 1:
            print(f"bench {name}: output mismatch across modes; aborting")
            return 1
        base = results[("unchecked", True)].stats
        for (backend, opt), r in sorted(results.items()):
            rows.append(BenchRow(name, backend, opt, r.stats).record(base))
    csv_path = os.path.join(out_dir, "bench.csv")
    fields = list(rows[0].keys())
    with open(csv_path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    for backend in ("inplace", "disjoint"):
        for metric in ("overhead_instr", "overhead_mem"):
            vals = [r[metric] for r in rows
                    if r["backend"] == backend and r["opt"] == 1]
            gmean = math.exp(sum(math.log1p(v) for v in vals) / len(vals)) - 1
            summary[f"{backend}.{metric}.gmean"] = round(gmean, 6)
    json_path = os.path.join(out_dir, "bench.json")
    with open(json_path, "w") as f:
        json.dump({"rows": rows, "summary": summary}, f, indent=2,
                  sort_keys=True)
        f.write("\n")
    for k in sorted(summary):
        print(f"{k} = {summary[k]}")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def run_corpus(key_bits: int = 32, seed: int = 0, oracle: bool = False,
               verbose: bool = True) -> int:
    failures = 0
    for name in corpus_names():
        src = load_guest("bugs", name)
        want_code, want_line = expected_trap(src)
        for backend in ("inplace", "disjoint"):
            prog = compile_source(src, backend=backend, key_bits=key_bits)
            cfg = VmConfig(backend=backend, key_bits=key_bits, seed=seed,
                           oracle=oracle)
            r = run_program(prog, cfg)
            ok = (r.exit_code == int(want_code)
                  and r.trap is not None and r.trap.line == want_line)
            if ok and oracle and r.divergence is not None:
                ok = r.divergence.clean
            if not ok:
                failures += 1
                got = (f"exit {r.exit_code} line "
                       f"{r.trap.line if r.trap else None}")
                if verbose:
                    print(f"FAIL {name} [{backend}]: want {want_code.name}"
                          f"@{want_line}, got {got}")
            elif verbose:
                print(f"pass {name} [{backend}]: {want_code.name}@{want_line}")
    if verbose:
        total = len(corpus_names()) * 2
        print(f"{total - failures}/{total} corpus checks passed")
    return 1 if failures else 0
