"""Command line entry point: run guest programs, drive the benchmark suite,
and replay the bug corpus."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench, checkopt, tir
from .driver import CompileError, compile_source
from .vm import VmConfig, run_program

EXIT_COMPILE_ERROR = 2


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--backend", choices=("inplace", "disjoint", "unchecked"),
                   default="inplace")
    p.add_argument("--key-bits", type=int, default=32)
    p.add_argument("--seed", type=int, default=None,
                   help="key generator seed (default: TEMPCC_SEED or 0)")
    p.add_argument("--no-opt-checks", action="store_true",
                   help="disable redundant key-check elimination")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("TEMPCC_SEED", "0"))


def cmd_run(args) -> int:
    try:
        src = open(args.file).read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_COMPILE_ERROR
    try:
        prog = compile_source(src, backend=args.backend, key_bits=args.key_bits,
                              opt_checks=not args.no_opt_checks)
    except CompileError as e:
        print(e.render(as_json=args.json_diagnostics, file=args.file),
              file=sys.stderr)
        return EXIT_COMPILE_ERROR
    if args.emit_tir:
        print(tir.dump_program(prog))
        return 0
    if args.dump_dataflow:
        print(checkopt.dump_dataflow(prog))
        return 0
    cfg = VmConfig(backend=args.backend, key_bits=args.key_bits,
                   seed=_seed(args), opt_checks=not args.no_opt_checks,
                   oracle=args.oracle)
    guest_input = []
    try:
        if not sys.stdin.isatty():
            guest_input = [int(tok) for tok in sys.stdin.read().split()]
    except (OSError, ValueError):
        guest_input = []
    result = run_program(prog, cfg, guest_input)
    sys.stdout.write(result.output)
    if result.trap is not None:
        line = result.trap.line
        where = f" at line {line}" if line else ""
        print(f"trap {int(result.trap.code)} ({result.trap.code.name})"
              f"{where}: {result.trap.msg}", file=sys.stderr)
    if args.stats:
        with open(args.stats, "w") as f:
            f.write(result.stats.to_json() + "\n")
    if args.oracle and result.divergence is not None:
        d = result.divergence
        if not d.clean:
            print(f"oracle divergence: fp={d.false_positives} "
                  f"fn={d.false_negatives} offset={d.offset_violations}",
                  file=sys.stderr)
    return result.exit_code


def cmd_bench(args) -> int:
    return bench.run_bench_suite(out_dir=args.out, key_bits=args.key_bits,
                                 seed=_seed(args))


def cmd_corpus(args) -> int:
    return bench.run_corpus(key_bits=args.key_bits, seed=_seed(args),
                            oracle=args.oracle)


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tempcc",
                                 description="MiniCC temporal-safety simulator")
    sub = ap.add_subparsers(dest="cmd", required=True)

    rp = sub.add_parser("run", help="compile and execute one guest program")
    rp.add_argument("file")
    _add_common(rp)
    rp.add_argument("--oracle", action="store_true",
                    help="run the liveness oracle alongside the checks")
    rp.add_argument("--stats", metavar="OUT.json",
                    help="write run counters as JSON")
    rp.add_argument("--emit-tir", action="store_true",
                    help="print the lowered IR and exit")
    rp.add_argument("--dump-dataflow", action="store_true",
                    help="print per-block check-validity facts and exit")
    rp.add_argument("--json-diagnostics", action="store_true",
                    help="emit compile diagnostics as JSON")
    rp.set_defaults(fn=cmd_run)

    bp = sub.add_parser("bench", help="run the benchmark suite")
    bp.add_argument("--out", default="bench_out", metavar="DIR")
    bp.add_argument("--key-bits", type=int, default=32)
    bp.add_argument("--seed", type=int, default=None)
    bp.set_defaults(fn=cmd_bench)

    cp = sub.add_parser("corpus", help="replay the temporal-bug corpus")
    cp.add_argument("--key-bits", type=int, default=32)
    cp.add_argument("--seed", type=int, default=None)
    cp.add_argument("--oracle", action="store_true")
    cp.set_defaults(fn=cmd_corpus)
    return ap


def main(argv=None) -> int:
    sys.setrecursionlimit(100_000)
    args = build_arg_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
