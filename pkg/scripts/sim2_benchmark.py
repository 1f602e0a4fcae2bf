#!/usr/bin/env python3
"""Tracking benchmark on the sine-covariance design: fit both models on
fresh panels and score them against the generator truth on both scales.

Example:
    python3 scripts/sim2_benchmark.py --replications 100 --jobs 2
"""

import argparse
import sys

from scgarch.experiments import (
    DEFAULT_TUNE_GRID,
    BenchmarkConfig,
    run_benchmark,
)
from scgarch.model import ScgarchConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replications", type=int, default=20)
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kalman-q", type=float, default=None,
                    help="fixed walk-noise scale (default: tuned)")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    fit = (ScgarchConfig(tune_grid=DEFAULT_TUNE_GRID) if args.kalman_q is None
           else ScgarchConfig(state_noise=args.kalman_q))
    result = run_benchmark(
        BenchmarkConfig(replications=args.replications, n=args.n,
                        seed=args.seed, fit=fit),
        jobs=args.jobs,
    )
    print(f"{'model':>8s} {'scale':>12s} {'MAE':>12s} {'MSE':>12s} {'reps':>5s}")
    for row in result.rows:
        print(f"{row.model:>8s} {row.scale:>12s} {row.mae:12.6g} {row.mse:12.6g} "
              f"{row.replications:5d}")
    for rep, model, msg in result.failures:
        print(f"replication {rep} ({model}) failed: {msg}", file=sys.stderr)
    return 1 if result.all_failed else 0


if __name__ == "__main__":
    sys.exit(main())
