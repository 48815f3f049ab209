"""Linear stability of flat lattices under the piecewise flat Ricci flow.

The face diagonals carry the interesting dynamics: a flat lattice is a
stationary point of the flow, and the growth or decay of face-diagonal
perturbations is governed by the Jacobian of the face-diagonal flow rates
with respect to the face-diagonal lengths, the *coefficient matrix* ``A``.
Positive real parts in its spectrum signal exponential instability.

``A`` is built column by column with central finite differences.  In
``'flattened'`` mode every perturbed configuration first has the body
diagonals of the affected blocks re-solved to flatness, so the matrix
describes the flow restricted to flat-interior blocks.

Row sums of ``A`` are eigenvalues whenever they are constant: the cubic
lattice gives 12/c² raw and 0 flattened.  The skew lattice has only
per-type constancy, captured by the reduced type-by-type matrix.
"""

from __future__ import annotations

import numpy as np

from .lattice import flat_lengths as _flat_lengths
from .ricci_flow import flatten_body_diagonals, flow_rhs

__all__ = [
    "NotStationaryError",
    "build_coefficient_matrix",
    "distinct_real_parts",
    "format_stencil",
    "reduced_matrix",
    "rotate_stencil",
    "row_sum_eigenpair",
    "spectrum",
    "stencil_row",
]

FACE_KINDS = ("yz", "zx", "xy")


class NotStationaryError(RuntimeError):
    """The base configuration is not a stationary point of the flow."""


def build_coefficient_matrix(tri, *, c=1.0, mode="raw", h_rel=1e-5,
                             lengths=None, stationary_tol=1e-10):
    """Jacobian of the face-diagonal flow about a flat lattice, (3n, 3n).

    Central differences with step ``h_rel`` times each edge length; the
    default step sits near the optimum for central differences in double
    precision, keeping eigenvalue noise below 1e-8 even for rescaled
    lattices where the matrix entries grow by 1/c².  With
    ``mode='flattened'`` each perturbed configuration is repaired by
    re-solving the body diagonals of the two blocks sharing the perturbed
    face diagonal before the rates are evaluated.
    """
    if mode not in ("raw", "flattened"):
        raise ValueError(f"unknown stability mode {mode!r}")
    L0 = _flat_lengths(tri, c) if lengths is None else np.asarray(lengths, dtype=float)
    base = np.abs(flow_rhs(tri, L0)).max()
    if base > stationary_tol:
        raise NotStationaryError(
            f"flow rate {base:.3e} at the base configuration exceeds "
            f"{stationary_tol:.1e}; the Jacobian would not describe a "
            "stationary point")

    fd = tri.face_diagonal_slice
    fd_edges = np.arange(fd.start, fd.stop)
    n_fd = fd_edges.size
    A = np.empty((n_fd, n_fd))
    for col, edge in enumerate(fd_edges):
        h = h_rel * L0[edge]
        rates = []
        for sign in (1.0, -1.0):
            L = L0.copy()
            L[edge] += sign * h
            if mode == "flattened":
                blocks = np.nonzero((tri.block_edges19 == edge).any(axis=1))[0]
                L = flatten_body_diagonals(tri, L, blocks=blocks)
            rates.append(flow_rhs(tri, L)[fd])
        A[:, col] = (rates[0] - rates[1]) / (2.0 * h)
    return A


def spectrum(A):
    """Eigenvalues sorted by descending real part."""
    w = np.linalg.eigvals(A)
    return w[np.argsort(-w.real)]


def distinct_real_parts(eigenvalues, count=None, decimals=6):
    """Distinct eigenvalue real parts, descending, grouped by rounding."""
    parts = np.unique(np.round(np.real(eigenvalues), decimals))[::-1]
    return parts if count is None else parts[:count]


def row_sum_eigenpair(A, tol=1e-8):
    """(row sum, all-ones vector) when every row sums to the same value.

    Returns ``None`` when the row sums differ by more than ``tol``; the
    all-ones vector is then not an eigenvector.
    """
    sums = A.sum(axis=1)
    if np.ptp(sums) > tol:
        return None
    return sums.mean(), np.ones(A.shape[0])


def reduced_matrix(tri, A):
    """Type-by-type reduction of the coefficient matrix, shape (3, 3).

    Entry (a, b) is the summed response of a type-``a`` face diagonal to a
    uniform perturbation of all type-``b`` face diagonals, averaged over the
    rows of type ``a`` (they agree up to finite-difference noise by
    translation symmetry).  Types are ordered ``yz, zx, xy``.
    """
    n = tri.n_blocks
    if A.shape != (3 * n, 3 * n):
        raise ValueError("coefficient matrix does not match the lattice")
    M = np.empty((3, 3))
    for a in range(3):
        rows = A[a * n:(a + 1) * n]
        for b in range(3):
            M[a, b] = rows[:, b * n:(b + 1) * n].sum(axis=1).mean()
    return M


def _signed_offset(block, origin, dims):
    off = []
    for o, s, d in zip(np.unravel_index(block, dims),
                       np.unravel_index(origin, dims), dims):
        r = (int(o) - int(s)) % d
        off.append(r - d if r > d // 2 else r)
    return tuple(off)


def stencil_row(tri, A, kind="xy", block=0, tol=1e-6):
    """Decode one row of ``A`` into ``{(kind, offset): coefficient}``.

    The row belongs to the ``kind`` face diagonal of ``block``; offsets are
    grid displacements of the perturbed edge from that block, wrapped to
    the symmetric range.  Coefficients below ``tol`` are dropped.
    """
    n = tri.n_blocks
    a = FACE_KINDS.index(kind)
    row = A[a * n + block]
    entries = {}
    for j, value in enumerate(row):
        if abs(value) < tol:
            continue
        b, blk = divmod(j, n)
        entries[(FACE_KINDS[b], _signed_offset(blk, block, tri.dims))] = value
    return entries


def rotate_stencil(entries, times=1):
    """Apply the cyclic relabelling x -> y -> z -> x to a stencil row.

    The lattice is symmetric under cyclically permuting the axes, which
    sends the yz face diagonal to zx, zx to xy, xy to yz, and a block
    offset (a, b, c) to (c, a, b).  The row for any face-diagonal kind is
    therefore the rotated row of any other kind.
    """
    kind_map = {"xy": "yz", "yz": "zx", "zx": "xy"}
    for _ in range(times % 3):
        entries = {(kind_map[k], (o[2], o[0], o[1])): v
                   for (k, o), v in entries.items()}
    return entries


def format_stencil(entries, decimals=6):
    """Readable lines for a decoded stencil row, grouped by edge type."""
    lines = []
    for kind in FACE_KINDS:
        for (k, off), value in sorted(entries.items()):
            if k == kind:
                lines.append(f"  {value:+.{decimals}g} * d_{k}{off}")
    return "\n".join(lines)
