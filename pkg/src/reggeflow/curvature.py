"""Curvatures of a block triangulation from deficit angles and dual volumes.

Deficit angles concentrate curvature on edges.  Distributing them over the
barycentric dual volumes gives three pointwise quantities:

* the scalar curvature ``R_v`` at a vertex: deficits of the incident edges
  weighted by edge length, divided by the vertex dual volume;
* the transverse (sectional) curvature ``K_l`` of an edge: its own deficit
  plus the deficits of the edges spanning a tetrahedron with it, each
  weighted by half its length and the squared cosine of the angle between
  the two edges, divided by the edge dual volume;
* the Ricci curvature ``Rc_l`` along an edge, assembled from the other two
  with the scalar curvature averaged over the two endpoints,
  ``Rc = (R_1 + R_2)/4 - K``.

The transverse sum runs over the edges of the fan of tetrahedra hinging on
the edge: the neighbours that share both a tetrahedron and an endpoint with
it.  Edges that merely touch an endpoint belong to neighbouring fans and do
not cross the edge's dual volume, so they contribute nothing transverse.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .dual_volumes import DualVolumes, dual_volumes, edge_pair_table
from .simplex_geometry import deficit_angles, star_directions, star_positions

__all__ = [
    "CurvatureField",
    "curvature_field",
    "edge_ricci_curvature",
    "edge_transverse_curvature",
    "vertex_scalar_curvature",
]


def vertex_scalar_curvature(tri, lengths, deficits=None, vertex_vols=None):
    """Scalar curvature at every vertex, shape (n_vertices,)."""
    lengths = np.asarray(lengths, dtype=float)
    if deficits is None:
        deficits = deficit_angles(tri, lengths)
    if vertex_vols is None:
        vertex_vols = dual_volumes(tri, lengths).vertex
    contrib = lengths * deficits
    summed = (np.bincount(tri.edges[:, 0], weights=contrib, minlength=tri.n_vertices)
              + np.bincount(tri.edges[:, 1], weights=contrib, minlength=tri.n_vertices))
    return summed / vertex_vols


def edge_transverse_curvature(tri, lengths, deficits=None, edge_vols=None,
                              pair_table=None):
    """Sectional curvature transverse to every edge, shape (n_edges,)."""
    lengths = np.asarray(lengths, dtype=float)
    if deficits is None:
        deficits = deficit_angles(tri, lengths)
    if pair_table is None:
        pair_table = edge_pair_table(tri, lengths)
    if edge_vols is None:
        edge_vols = dual_volumes(tri, lengths).edge
    terms = 0.5 * lengths[pair_table.neighbor] * pair_table.cos_ray ** 2 \
        * deficits[pair_table.neighbor]
    cross = np.where(pair_table.include, terms, 0.0).sum(axis=1)
    return (lengths * deficits + cross) / edge_vols


def edge_ricci_curvature(tri, lengths, field=None):
    """Ricci curvature along every edge, shape (n_edges,)."""
    if field is None:
        field = curvature_field(tri, lengths)
    return field.edge_ricci


@dataclass
class CurvatureField:
    """All curvature quantities of one length configuration."""

    lengths: np.ndarray          # (n_edges,)
    deficit: np.ndarray          # (n_edges,)
    vertex_scalar: np.ndarray    # (n_vertices,)
    edge_transverse: np.ndarray  # (n_edges,)
    edge_ricci: np.ndarray       # (n_edges,)
    dual: DualVolumes

    def to_json(self):
        return {
            "lengths": self.lengths.tolist(),
            "deficit": self.deficit.tolist(),
            "vertex_scalar": self.vertex_scalar.tolist(),
            "edge_transverse": self.edge_transverse.tolist(),
            "edge_ricci": self.edge_ricci.tolist(),
        }

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    def save_csv(self, path, tri=None):
        """One row per edge; includes the role column when ``tri`` is given."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["edge", "length", "deficit", "transverse", "ricci"]
            if tri is not None:
                header.insert(1, "role")
            writer.writerow(header)
            for e in range(len(self.lengths)):
                row = [e, repr(self.lengths[e]), repr(self.deficit[e]),
                       repr(self.edge_transverse[e]), repr(self.edge_ricci[e])]
                if tri is not None:
                    row.insert(1, int(tri.edge_role[e]))
                writer.writerow(row)


def curvature_field(tri, lengths):
    """Evaluate deficits, dual volumes and all curvatures in one pass."""
    lengths = np.asarray(lengths, dtype=float)
    positions = star_positions(tri, lengths)
    deficits = deficit_angles(tri, lengths)
    dual = dual_volumes(tri, lengths, positions=positions)
    pair = edge_pair_table(tri, lengths,
                           directions=star_directions(tri, positions))
    R = vertex_scalar_curvature(tri, lengths, deficits=deficits,
                                vertex_vols=dual.vertex)
    K = edge_transverse_curvature(tri, lengths, deficits=deficits,
                                  edge_vols=dual.edge, pair_table=pair)
    Rc = 0.25 * (R[tri.edges[:, 0]] + R[tri.edges[:, 1]]) - K
    return CurvatureField(
        lengths=lengths,
        deficit=deficits,
        vertex_scalar=R,
        edge_transverse=K,
        edge_ricci=Rc,
        dual=dual,
    )
