#!/usr/bin/env python3
"""Run the benchmark suite and write CSV/JSON reports."""

import argparse
import sys

from tempcc.bench import run_bench_suite

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="bench_out")
    ap.add_argument("--key-bits", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sys.exit(run_bench_suite(args.out, key_bits=args.key_bits, seed=args.seed))
