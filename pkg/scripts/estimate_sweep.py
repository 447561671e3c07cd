#!/usr/bin/env python3
"""Sweep the constant estimator over walks, entropy functions, and
ampliation factors; write one CSV row per run.

Usage:
    python3 scripts/estimate_sweep.py --out sweep.csv [--restarts 8]
        [--iterations 500] [--seed 0] [--full]

The quick profile (default) uses a reduced budget and finishes in well
under a minute; --full switches to the default optimizer budget used by
the acceptance gate.
"""

import argparse
import csv
import sys
import time

from sobolev_lab import (OptimizerBudget, bernoulli_laplace,
                         estimate_constant, random_transposition)
from sobolev_lab.functions import power, xlogx


def jobs():
    for n in (3, 4):
        for k in (1, 2):
            for f in (power(1.25), power(1.5), power(1.75), xlogx()):
                yield random_transposition(n), f, k
    for n, r in ((3, 1), (4, 2)):
        for f in (power(1.25), power(1.5), power(1.75)):
            yield bernoulli_laplace(n, r), f, 1


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="estimate_sweep.csv")
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--iterations", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full", action="store_true",
                    help="run at the default (slow) budget")
    args = ap.parse_args(argv)

    budget = (OptimizerBudget(seed=args.seed) if args.full
              else OptimizerBudget(restarts=args.restarts,
                                   iterations=args.iterations,
                                   seed=args.seed))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "f", "p", "k", "estimate",
                         "bracket_low", "bracket_high", "in_bracket",
                         "n_restarts", "seconds"])
        for A, f, k in jobs():
            t0 = time.monotonic()
            res = estimate_constant(A, f, ampliation=k, budget=budget)
            dt = time.monotonic() - t0
            spec = f.to_spec()
            low, high = res.bracket if res.bracket else ("", "")
            inside = ""
            if res.bracket:
                inside = str(low - 1e-6 <= res.estimated_lambda <= high + 1e-6)
            writer.writerow([
                A.spec["model"], spec["tag"], spec.get("p", ""), k,
                f"{res.estimated_lambda:.12g}", low, high, inside,
                res.n_restarts, f"{dt:.2f}"])
            print(f"{A.spec['model']}({A.spec['params']}) f={f.label} k={k}: "
                  f"{res.estimated_lambda:.6f}  [{dt:.1f}s]")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
