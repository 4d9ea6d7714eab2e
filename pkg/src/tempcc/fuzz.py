"""Seeded random guest programs that stress checked pointer arithmetic.

Each generated program allocates a few arrays, performs in-bounds index and
pointer arithmetic, and frees everything.  Running one under the oracle
verifies the offset-metadata invariant (raw - offset == payload start) at
every dynamic key check."""

from __future__ import annotations

import random

from .driver import compile_source
from .vm import VmConfig, run_program


def gen_program(seed: int) -> str:
    rng = random.Random(seed)
    narr = rng.randint(1, 3)
    sizes = [rng.randint(4, 24) for _ in range(narr)]
    lines = ["int main() {", "    int s = 0;"]
    for i, sz in enumerate(sizes):
        lines.append(f"    mm_array_ptr<int> a{i} = mm_alloc<int>({sz});")
    nptr = 0
    for _ in range(rng.randint(4, 14)):
        ai = rng.randrange(narr)
        sz = sizes[ai]
        op = rng.randrange(4)
        if op == 0:
            idx = rng.randrange(sz)
            lines.append(f"    a{ai}[{idx}] = {rng.randint(-50, 50)};")
        elif op == 1:
            idx = rng.randrange(sz)
            lines.append(f"    s = s + a{ai}[{idx}];")
        elif op == 2 and sz > 1:
            # shifted view: base + c indexed back within bounds
            c = rng.randrange(1, sz)
            idx = rng.randrange(sz - c)
            nptr += 1
            lines.append(f"    mm_array_ptr<int> q{nptr} = a{ai} + {c};")
            lines.append(f"    s = s + q{nptr}[{idx}];")
        else:
            idx = rng.randrange(sz)
            nptr += 1
            lines.append(f"    mm_ptr<int> p{nptr} = &a{ai}[{idx}];")
            lines.append(f"    *p{nptr} = *p{nptr} + 1;")
            lines.append(f"    s = s + *p{nptr};")
    for i in range(narr):
        lines.append(f"    mm_free(a{i});")
    lines.append("    print_int(s);")
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def run_fuzz(count: int = 1000, backend: str = "inplace", key_bits: int = 32,
             seed_base: int = 0) -> dict:
    """Returns aggregate results: programs run, traps, offset violations."""
    traps = 0
    violations = 0
    checks = 0
    for k in range(count):
        src = gen_program(seed_base + k)
        prog = compile_source(src, backend=backend, key_bits=key_bits)
        cfg = VmConfig(backend=backend, key_bits=key_bits, oracle=True)
        r = run_program(prog, cfg)
        checks += r.stats.key_checks_exec
        if r.exit_code != 0:
            traps += 1
        if r.divergence is not None:
            violations += len(r.divergence.offset_violations)
            violations += len(r.divergence.false_positives)
            violations += len(r.divergence.false_negatives)
    return {"count": count, "traps": traps, "violations": violations,
            "keyChecks": checks}
