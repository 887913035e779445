#!/usr/bin/env python3
"""Per-h tables for the calculus sweeps: remainder norms and local slopes.

    python3 scripts/order_sweeps.py moyal-order --j1 8
"""
import argparse

from twomicro.experiments import run_experiment

SWEEPS = ("moyal-order", "convert-order", "commutator-order", "norm-scaling", "offdiag-decay")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("experiment", choices=SWEEPS)
    ap.add_argument("--j0", type=int, default=3)
    ap.add_argument("--j1", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    params = {"j0": args.j0}
    if args.j1 is not None:
        params["j1"] = args.j1
    out = run_experiment(args.experiment, params, threads=args.threads)
    for s in out.sweeps:
        reg = s.regression
        print(f"\n{s.label}   fitted slope {reg.slope:.4f}   residual {reg.residual:.2e}")
        print(f"{'h':>12s} {'N':>6s} {'value':>14s} {'local slope':>12s}")
        steps = [None] + list(reg.step_slopes)
        for p, st in zip(s.points, steps):
            loc = "" if st is None else f"{st:12.4f}"
            print(f"{p.h:12.6g} {p.N:6d} {p.value:14.6e} {loc}")
    for c in out.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value} {c.op} {c.threshold}")


if __name__ == "__main__":
    main()
