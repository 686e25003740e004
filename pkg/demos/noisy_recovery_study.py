"""
Twenty noisy trials at national scale
=====================================

The tolerance for gamma in the test suite (0.02) was fixed from this run:
500 territories, noise sigma 0.1, seeds 0..19. It takes about half a minute.
"""

import time

import numpy as np

from citegravity.synth import GravityParams, recovery_trial

params = GravityParams(noise_sigma=0.1)
t0 = time.perf_counter()
rows = []
for seed in range(20):
    r = recovery_trial(params, 500, seed=seed)
    rows.append([r.deltas[k] for k in ("ln_k", "alpha", "beta", "gamma")])
    print(f"seed {seed:>2}: " + "  ".join(f"{k} {v:+.5f}" for k, v in r.deltas.items()))

rows = np.array(rows)
print(f"\nmedian |delta gamma| = {np.median(np.abs(rows[:, 3])):.5f}  ({time.perf_counter() - t0:.1f} s)")
print("median |delta| per parameter:", np.round(np.median(np.abs(rows), axis=0), 5))
