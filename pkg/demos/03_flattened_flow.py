"""Suppress the instability by keeping the blocks internally flat.

Re-solving every body diagonal so that its six surrounding deficit angles
vanish removes the unstable face-diagonal mode: the same run that grows by
ten orders of magnitude in raw mode now stays at the precision floor.  The
skew lattice at scale c = 1/3 shows the same suppression with a small
linear drift of a few 1e-15 per unit time.
"""

import numpy as np

from reggeflow import build_torus
from reggeflow.fitting import trace_statistics
from reggeflow.ricci_flow import run_flow

tri = build_torus("cubic", (3, 3, 3))
for mode in ("raw", "flattened"):
    trace = run_flow(tri, steps=100, dt=0.01, sigma=1e-15, seed=0, mode=mode)
    stats = trace_statistics(trace)
    print(f"cubic {mode:9s}: initial perturbation "
          f"{stats['initial_perturbation']:.2e}, median |change| "
          f"{stats['median_change']:.2e}, max |change| "
          f"{stats['max_change']:.2e}")
    if trace.flatten_residuals is not None:
        print(f"{'':16s}worst body deficit left by the flattening solve: "
              f"{trace.flatten_residuals.max():.2e}")

print()
tri = build_torus("skew", (3, 3, 3))
slopes = []
for seed in range(5):
    trace = run_flow(tri, c=1 / 3, steps=100, dt=0.01, sigma=1e-15,
                     seed=seed, mode="flattened")
    stats = trace_statistics(trace)
    slopes.append(stats["median_slope"])
    print(f"skew flattened seed {seed}: max |change| "
          f"{stats['max_change']:.2e}, median slope "
          f"{stats['median_slope']:+.2e} per unit time")
print(f"median drift over seeds: {np.median(slopes):+.2e} "
      "(precision floor, not a growing mode)")
