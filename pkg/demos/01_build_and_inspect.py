"""Build the two block triangulations of the 3-torus and inspect them.

Every block of the periodic grid carries seven edge classes: three axis
edges, three face diagonals, and one body diagonal.  With the tabulated
flat lengths all deficit angles vanish, so the lattice is an exact flat
torus and a fixed point of the flow; the dual volume of every edge then
equals one block volume.
"""

import numpy as np

from reggeflow import EdgeRole, build_torus, flat_lengths
from reggeflow.curvature import curvature_field
from reggeflow.dual_volumes import edge_dual_volumes
from reggeflow.simplex_geometry import deficit_angles

for kind in ("cubic", "skew"):
    tri = build_torus(kind, (3, 3, 3))
    lengths = flat_lengths(tri)
    print(f"== {kind} blocks on a 3 x 3 x 3 torus ==")
    print(f"{tri.n_vertices} vertices, {tri.n_edges} edges, "
          f"{tri.n_tets} tetrahedra ({tri.n_blocks} blocks of 6)")

    n = tri.n_blocks
    print("flat edge lengths by role:")
    for role in EdgeRole:
        print(f"  {role.name.lower():8s} {lengths[role * n]:.6f}")

    eps = deficit_angles(tri, lengths)
    print(f"max |deficit angle| at the flat point: {np.abs(eps).max():.2e}")

    dual = edge_dual_volumes(tri, lengths)
    print(f"edge dual volumes: min {dual.min():.12f} max {dual.max():.12f} "
          "(one block volume each)")

    field = curvature_field(tri, lengths)
    print(f"max |scalar curvature| {np.abs(field.vertex_scalar).max():.2e}, "
          f"max |Ricci| {np.abs(field.edge_ricci).max():.2e}")

    # scaling the lattice by c scales every deficit-free length with it
    third = flat_lengths(tri, 1 / 3)
    assert np.allclose(third, lengths / 3)
    print("scaling check: flat lengths at c=1/3 are exactly one third\n")
