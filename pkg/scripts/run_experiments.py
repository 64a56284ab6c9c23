#!/usr/bin/env python3
"""Run every experiment with default settings and print a short summary.

    python scripts/run_experiments.py [--out out] [--seed 0] [--quick]
"""

import argparse
import logging
import time

import numpy as np
from scipy import stats

from supershape.harness import ExperimentConfig, render_maps, run_ideal, run_near, sweep_noise, sweep_param, sweep_rotation
from supershape.harness import PARAM_KINDS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="base noise seed")
    ap.add_argument("--quick", action="store_true", help="5 noise trials instead of 30")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = ExperimentConfig(out_dir=args.out, seed=args.seed, trials=5 if args.quick else 30)
    t0 = time.perf_counter()

    for title, rows in (("ideal", run_ideal(cfg)), ("near", run_near(cfg))):
        print(f"== {title}")
        for r in rows:
            print(f"  {r['shape']:<20} mscore={r['mscore']:.5f} weight={r['min_weight']:.2e} "
                  f"mean={r['mean_weight']:.2e} nearest={r['nearest']} correct={r['correct']}")

    print("== noise")
    for name, data in sweep_noise(cfg).items():
        levels, means, _, rates = zip(*data["summary"])
        rho = stats.spearmanr(levels, means)[0]
        print(f"  {name:<20} spearman={rho:.3f} mscore@20%={means[-1]:.3f} "
              f"correct@7%={rates[7]:.2f} correct@20%={rates[-1]:.2f}")

    print("== rotation")
    for name, series in sweep_rotation(cfg).items():
        scores = np.array([s for _, s in series])
        print(f"  {name:<20} min={scores.min():.3f} at {series[int(scores.argmin())][0]:g} deg")

    print("== parameters")
    for which in PARAM_KINDS:
        for name, series in sweep_param(cfg, which).items():
            lo, hi = series[0], series[-1]
            print(f"  {which:<4} {name:<20} ends: {lo[0]:g}->{lo[1]:.3f}  {hi[0]:g}->{hi[1]:.3f}")

    for path in render_maps(cfg):
        print(f"map {path}")
    print(f"done in {time.perf_counter() - t0:.1f}s, results under {cfg.out_dir}/")


if __name__ == "__main__":
    main()
