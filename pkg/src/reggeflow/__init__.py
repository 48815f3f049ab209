"""Piecewise flat Ricci flow on block-triangulated 3-tori."""

from reggeflow.curvature import curvature_field
from reggeflow.dual_volumes import dual_volumes, edge_dual_volumes
from reggeflow.lattice import (
    BlockKind,
    EdgeRole,
    TorusTriangulation,
    build_torus,
    face_diagonal_coords,
    face_diagonal_index,
    flat_lengths,
    mesh_from_json,
)
from reggeflow.ricci_flow import (
    FlowTrace,
    flatten_body_diagonals,
    flow_rhs,
    load_trace,
    run_flow,
)
from reggeflow.stability import build_coefficient_matrix, spectrum

__version__ = "0.1.0"

__all__ = [
    "BlockKind",
    "EdgeRole",
    "FlowTrace",
    "TorusTriangulation",
    "build_coefficient_matrix",
    "build_torus",
    "curvature_field",
    "dual_volumes",
    "edge_dual_volumes",
    "face_diagonal_coords",
    "face_diagonal_index",
    "flat_lengths",
    "flatten_body_diagonals",
    "flow_rhs",
    "load_trace",
    "mesh_from_json",
    "run_flow",
    "spectrum",
    "__version__",
]
