#!/usr/bin/env python3
"""Repeated-seed pull study for the full pipeline.

Runs the configured experiment many times with fresh seeds and reports the
distribution of (eps_hat - eps_true) / sigma_eps, which should be standard
normal if the estimator and its uncertainty are calibrated.
"""

import argparse
from dataclasses import replace

import numpy as np

from qvolt.config import load_config
from qvolt.pipeline import run_pipeline


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", required=True)
    ap.add_argument("--repetitions", type=int, default=100)
    args = ap.parse_args()

    config = load_config(args.config)
    eps_true = config.params.eps_gamma
    pulls = []
    for rep in range(args.repetitions):
        cfg = replace(config, seed=config.seed + rep)
        _, _, _, result = run_pipeline(cfg)
        pulls.append((result.fit.eps - eps_true) / result.fit.sigma_eps)
        print(
            f"rep {rep:3d}: eps_hat = {result.fit.eps:+.3e} "
            f"+- {result.fit.sigma_eps:.3e}  pull = {pulls[-1]:+.2f}"
        )
    pulls = np.array(pulls)
    print(f"\npull mean = {pulls.mean():+.3f}  sd = {pulls.std(ddof=1):.3f} "
          f"({args.repetitions} repetitions)")


if __name__ == "__main__":
    main()
