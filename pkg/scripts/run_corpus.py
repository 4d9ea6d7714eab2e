#!/usr/bin/env python3
"""Replay the temporal-bug corpus on both checked backends."""

import argparse
import sys

from tempcc.bench import run_corpus

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--key-bits", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--oracle", action="store_true")
    args = ap.parse_args()
    sys.exit(run_corpus(key_bits=args.key_bits, seed=args.seed,
                        oracle=args.oracle))
