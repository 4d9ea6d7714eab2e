#!/usr/bin/env python3
"""Generate and run seeded random pointer-arithmetic programs under the
liveness oracle, reporting any metadata-invariant violations."""

import argparse
import json

from tempcc.fuzz import run_fuzz

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--backend", default="inplace")
    ap.add_argument("--key-bits", type=int, default=32)
    ap.add_argument("--seed-base", type=int, default=0)
    args = ap.parse_args()
    print(json.dumps(run_fuzz(args.count, args.backend, args.key_bits,
                              args.seed_base), indent=2))
