"""Noise and data-size sensitivity, averaged over a few seeds.

Run: python3 demos/sensitivity.py [n_seeds]
"""
import sys
import warnings

import numpy as np

from assetfail.evaluation import (
    bundled_config,
    combine,
    generate_fleet,
    noise_experiment,
    size_experiment,
)

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 3
warnings.simplefilter("ignore")

noise, size = {}, {}
for seed in range(n_seeds):
    d = combine(*generate_fleet(bundled_config().with_seed(seed)))
    for k, r in noise_experiment(d, seed).items():
        noise.setdefault(k, []).append(r.macro.f1)
    for k, r in size_experiment(d, seed=seed).items():
        size.setdefault(k, []).append(r.macro.f1)
    print(f"seed {seed} done")

print(f"\nmacro F1 over {n_seeds} seeds")
for k, v in noise.items():
    print(f"  {k:<11} {np.mean(v):.4f}")
for k, v in size.items():
    print(f"  {k:>4} assets {np.mean(v):.4f}")
