"""Watch the face-diagonal instability grow out of rounding noise.

The flat cubic lattice is a fixed point of the edge-length flow, but an
unstable one: a perturbation of the face diagonals at the precision floor
is amplified exponentially while the axis and body edges barely move.
Fitting the recorded deviations recovers the dominant growth rate; the
explicit Euler step with dt = 0.01 biases a true rate k = 12 down to
ln(1 + 12 dt) / dt ~ 11.33, and shrinking dt removes the bias.
"""

import numpy as np

from reggeflow import build_torus
from reggeflow.fitting import fit_exponential_series
from reggeflow.ricci_flow import run_flow

tri = build_torus("cubic", (3, 3, 3))
n = tri.n_blocks

trace = run_flow(tri, steps=100, dt=0.01, sigma=1e-15, seed=0, mode="raw")
dev = np.abs(trace.deviations())
roles = np.asarray(trace.edge_roles())

print("median |deviation from flat| by edge class:")
print(f"{'t':>6s} {'axis':>10s} {'face diag':>10s} {'body':>10s}")
for k in (0, 25, 50, 75, 100):
    row = dev[k]
    print(f"{trace.times[k]:6.2f} "
          f"{np.median(row[np.char.startswith(roles, 'axis')]):10.2e} "
          f"{np.median(row[np.char.startswith(roles, 'diag')]):10.2e} "
          f"{np.median(row[roles == 'body']):10.2e}")

edge = 3 * n  # one yz face diagonal
fit = fit_exponential_series(trace.times, trace.deviations()[:, edge],
                             rate_seeds=[12.0, 6.0, 2.7])
print(f"\nfit of edge {edge}: dominant rate {fit.rates[0]:.4f} "
      f"(R^2 = {fit.r_squared:.6f})")
print(f"Euler-biased expectation ln(1 + 12 dt)/dt = "
      f"{np.log(1 + 12 * 0.01) / 0.01:.4f}")

fine = run_flow(tri, steps=1000, dt=1e-3, record_every=10,
                sigma=1e-15, seed=0, mode="raw")
fit_fine = fit_exponential_series(fine.times, fine.deviations()[:, edge],
                                  rate_seeds=[12.0, 6.0, 2.7])
print(f"same run at dt = 0.001: dominant rate {fit_fine.rates[0]:.4f} "
      "(the bias is gone)")
