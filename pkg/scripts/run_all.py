#!/usr/bin/env python3
"""Run every config in configs/ and print a one-line verdict per experiment.

    python3 scripts/run_all.py [--out results] [--skip moyal-order,...]
"""
import argparse
import glob
import os
import time

from twomicro.cli import load_config, run


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--configs", default=os.path.join(os.path.dirname(__file__), "..", "configs"))
    ap.add_argument("--out", default="results")
    ap.add_argument("--skip", default="", help="comma-separated config names to skip")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    skip = {s for s in args.skip.split(",") if s}
    worst = 0
    for path in sorted(glob.glob(os.path.join(args.configs, "*.json"))):
        name = os.path.splitext(os.path.basename(path))[0]
        if name in skip:
            continue
        t0 = time.perf_counter()
        code, bundle = run(load_config(path), os.path.join(args.out, name), args.threads)
        worst = max(worst, code)
        print(f"{name:28s} {'PASS' if bundle['pass'] else 'FAIL'}  {time.perf_counter() - t0:7.1f}s")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
