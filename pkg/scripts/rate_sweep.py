#!/usr/bin/env python3
"""Epsilon sweep: accelerated solver vs projected gradient descent.

Runs both solvers on the same seeded instance across a grid of target
accuracies, writes per-run CSV traces plus summary files, and prints the
fitted oracle-complexity exponents (evals ~ (1/eps)^p).

    python3 scripts/rate_sweep.py --output-dir out/ [--seed N] [--epsilons ...]
"""

import argparse
import os
import sys

from curvopt.bench import ExperimentConfig, fit_rate_exponent, run_sweep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", required=True)
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--R", type=float, default=1.0)
    ap.add_argument("--anchors", type=int, default=5)
    ap.add_argument(
        "--epsilons",
        default="1e-2,1e-3,1e-4,1e-5",
        help="comma-separated accuracy targets (add 1e-6 for the full run)",
    )
    args = ap.parse_args(argv)
    epsilons = [float(v) for v in args.epsilons.split(",") if v]

    os.makedirs(args.output_dir, exist_ok=True)
    base = ExperimentConfig(
        manifold="hyperbolic",
        d=args.d,
        R=args.R,
        anchor_count=args.anchors,
        weights="random",
        seed=args.seed,
        treat_gconvex=True,
    )
    for solver, deflate in (("axgd", True), ("rgd", False)):
        cfg = ExperimentConfig(**{**base.__dict__, "solver": solver})
        series = run_sweep(cfg, epsilons, args.output_dir)
        for eps, evals, gap in series:
            print(f"{solver} eps={eps:g} evals={evals} gap={gap:.3e}")
        if len(series) >= 4:
            slope = fit_rate_exponent([(e, n) for e, n, _ in series], deflate_log=deflate)
            print(f"{solver} fitted exponent: {slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
