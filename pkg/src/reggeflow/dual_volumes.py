"""Barycentric dual volumes on block triangulations.

The barycentric dual of a vertex collects, inside every tetrahedron that
contains it, the region whose largest barycentric coordinate belongs to that
vertex.  Within one tetrahedron this region is the hexahedron spanned by the
vertex, the midpoints of the three edges at the vertex, the centroids of the
three faces at the vertex, and the tetrahedron centroid; it splits into six
mini-tetrahedra of volume V_tet / 24 each, so every vertex receives exactly a
quarter of each tetrahedron it belongs to.

The dual volume of an edge is the part of its two endpoint duals lying
between the planes orthogonal to the edge through its endpoints.  It is
assembled by clipping the mini-tetrahedra of both endpoint duals against that
slab, one half-space at a time, with a marching-tetrahedra case table.  All
fragment coordinates live in the unfolded star frame of their own vertex, so
the construction needs no global embedding and survives curved configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import STAR_TEMPLATE
from .simplex_geometry import (
    star_directions,
    star_positions,
    tet_edge_lengths,
    tet_volumes,
)

__all__ = [
    "DualVolumes",
    "EdgePairTable",
    "clip_tets_halfspace",
    "dual_volumes",
    "edge_dual_volumes",
    "edge_pair_table",
    "vertex_dual_volumes",
    "vertex_fragment_tets",
]


# ---------------------------------------------------------------------------
# Vertex duals
# ---------------------------------------------------------------------------

def vertex_dual_volumes(tri, lengths=None, tet_vols=None):
    """Barycentric dual volume of every vertex, shape (n_vertices,).

    Each tetrahedron contributes a quarter of its volume to each of its four
    corners.  Pass precomputed ``tet_vols`` to skip the volume evaluation.
    """
    if tet_vols is None:
        tet_vols = tet_volumes(tet_edge_lengths(tri, np.asarray(lengths, dtype=float)))
    share = np.repeat(tet_vols / 4.0, 4)
    return np.bincount(tri.tets.ravel(), weights=share, minlength=tri.n_vertices)


def _mini_tet_weights():
    """Affine weights turning star-tet corners into dual mini-tet corners.

    Returns (24, 6, 4, 4): per star tet, six mini-tets, four corners each,
    expressed as barycentric weights over the four tet corners.  Corner 0 is
    the star centre, corner 1 an edge midpoint, corner 2 a face centroid and
    corner 3 the tet centroid.
    """
    origin = STAR_TEMPLATE.origin_slot
    W = np.zeros((len(origin), 6, 4, 4))
    for t, o in enumerate(origin):
        a, b, c = [s for s in range(4) if s != o]
        pairs = ((a, a, b), (b, a, b), (a, a, c), (c, a, c), (b, b, c), (c, b, c))
        for k, (mid, f1, f2) in enumerate(pairs):
            W[t, k, 0, o] = 1.0
            W[t, k, 1, [o, mid]] = 0.5
            W[t, k, 2, [o, f1, f2]] = 1.0 / 3.0
            W[t, k, 3, :] = 0.25
    return W


_MINI_WEIGHTS = _mini_tet_weights()


def _mini_corner_gathers():
    """Flat gather indices turning (24, 4) corner values into (144, 4) ones.

    For star tet ``t`` and mini ``k``, the four mini corners project to the
    origin corner, the midpoint combination, the face-centroid combination
    and the tet centroid; each is a fixed convex combination of at most
    three tet corners, so per-corner values gather much faster than a dense
    weight contraction.
    """
    origin = STAR_TEMPLATE.origin_slot
    ori, mid, fc1, fc2 = [], [], [], []
    for t, o in enumerate(origin):
        a, b, c = [s for s in range(4) if s != o]
        for m, f1, f2 in ((a, a, b), (b, a, b), (a, a, c), (c, a, c),
                          (b, b, c), (c, b, c)):
            ori.append(4 * t + o)
            mid.append(4 * t + m)
            fc1.append(4 * t + f1)
            fc2.append(4 * t + f2)
    return (np.array(ori), np.array(mid), np.array(fc1), np.array(fc2))


_MINI_ORI, _MINI_MID, _MINI_F1, _MINI_F2 = _mini_corner_gathers()


def _mini_projection_range(proj):
    """Min and max slab coordinate of every mini tet, each (E, 144).

    ``proj`` holds the slab coordinates of the star-tet corners, (E, 24, 4).
    """
    flat = proj.reshape(proj.shape[0], 96)
    po = flat[:, _MINI_ORI]
    p1 = 0.5 * (po + flat[:, _MINI_MID])
    p2 = (po + flat[:, _MINI_F1] + flat[:, _MINI_F2]) / 3.0
    p3 = np.repeat(proj.mean(axis=2), 6, axis=1)
    dmin = np.minimum(np.minimum(po, p1), np.minimum(p2, p3))
    dmax = np.maximum(np.maximum(po, p1), np.maximum(p2, p3))
    return dmin, dmax


def vertex_fragment_tets(tri, positions):
    """Mini-tetrahedra of every vertex dual in its own star frame.

    ``positions`` is the (n, 24, 4, 3) star embedding; the result has shape
    (n, 144, 4, 3) with the star centre at the origin of each frame.
    """
    M = np.einsum("tkjs,ntsd->ntkjd", _MINI_WEIGHTS, positions)
    return M.reshape(positions.shape[0], 144, 4, 3)


# ---------------------------------------------------------------------------
# Half-space clipping
# ---------------------------------------------------------------------------

def _signed_volumes(tets):
    a = tets[..., 1, :] - tets[..., 0, :]
    b = tets[..., 2, :] - tets[..., 0, :]
    c = tets[..., 3, :] - tets[..., 0, :]
    return np.einsum("...d,...d->...", a, np.cross(b, c)) / 6.0


def clip_tets_halfspace(tets, normals, offsets):
    """Clip tetrahedra against the half-space ``x . n >= o``.

    Parameters: ``tets`` (N, 4, 3), ``normals`` (N, 3), ``offsets`` (N,).
    Returns (N, 3, 4, 3): up to three tetrahedra covering the kept part of
    each input, padded with zero-volume degenerate tets.  Vertices exactly on
    the plane count as kept, which keeps the output continuous across ties.
    """
    tets = np.asarray(tets, dtype=float)
    N = len(tets)
    d = np.einsum("nvd,nd->nv", tets, normals) - np.asarray(offsets)[:, None]
    below = d < 0.0
    k = below.sum(axis=1)
    order = np.argsort(below, axis=1, kind="stable")  # kept slots first
    T = np.take_along_axis(tets, order[:, :, None], axis=1)
    dd = np.take_along_axis(d, order, axis=1)

    out = np.broadcast_to(T[:, :1, None, :], (N, 3, 4, 3)).copy()

    m = k == 0
    out[m, 0] = T[m]

    m = k == 1
    if m.any():
        Tm, dm = T[m], dd[m]
        A, dA = Tm[:, 3], dm[:, 3]
        E = [A + (dA / (dA - dm[:, j]))[:, None] * (Tm[:, j] - A) for j in range(3)]
        out[m, 0] = np.stack([Tm[:, 0], Tm[:, 1], Tm[:, 2], E[0]], axis=1)
        out[m, 1] = np.stack([Tm[:, 1], Tm[:, 2], E[0], E[1]], axis=1)
        out[m, 2] = np.stack([Tm[:, 2], E[0], E[1], E[2]], axis=1)

    m = k == 2
    if m.any():
        Tm, dm = T[m], dd[m]

        def cut(i, j):  # point on segment kept_i -- cut_j
            t = dm[:, j] / (dm[:, j] - dm[:, i])
            return Tm[:, j] + t[:, None] * (Tm[:, i] - Tm[:, j])

        E00, E01 = cut(0, 2), cut(0, 3)
        E10, E11 = cut(1, 2), cut(1, 3)
        out[m, 0] = np.stack([Tm[:, 0], E00, E01, Tm[:, 1]], axis=1)
        out[m, 1] = np.stack([E00, E01, Tm[:, 1], E10], axis=1)
        out[m, 2] = np.stack([E01, Tm[:, 1], E10, E11], axis=1)

    m = k == 3
    if m.any():
        Tm, dm = T[m], dd[m]
        K, dK = Tm[:, 0], dm[:, 0]
        E = [Tm[:, j] + (dm[:, j] / (dm[:, j] - dK))[:, None] * (K - Tm[:, j])
             for j in (1, 2, 3)]
        out[m, 0] = np.stack([K, E[0], E[1], E[2]], axis=1)

    return out


# ---------------------------------------------------------------------------
# Edge duals
# ---------------------------------------------------------------------------

def edge_dual_volumes(tri, lengths, positions=None, tet_vols=None):
    """Dual volume of every edge, shape (n_edges,).

    For each edge the mini-tetrahedra of both endpoint duals are clipped to
    the slab ``0 <= x . u <= |l|`` in the endpoint's own star frame, where
    ``u`` is the unit vector along the edge away from that endpoint.  Minis
    entirely inside the slab contribute their known volume V_tet / 24 and
    minis with no corner strictly inside contribute nothing; only the few
    straddling a slab plane go through the clipping case table.
    """
    lengths = np.asarray(lengths, dtype=float)
    P = star_positions(tri, lengths) if positions is None else positions
    D = star_directions(tri, P)
    if tet_vols is None:
        tet_vols = tet_volumes(tet_edge_lengths(tri, lengths))
    mini_vol = np.repeat(tet_vols[tri.star_tets] / 24.0, 6, axis=1)  # (n, 144)
    E = tri.n_edges
    role = tri.edge_role
    rows = np.arange(E)
    out = np.zeros(E)

    for vv, own in ((tri.edges[:, 0], role), (tri.edges[:, 1], role + 7)):
        u = D[vv, own] / lengths[:, None]                     # (E, 3)
        proj = (P[vv].reshape(E, 96, 3) @ u[:, :, None]).reshape(E, 24, 4)
        dmin, dmax = _mini_projection_range(proj)             # (E, 144)
        span = lengths[:, None]
        whole = (dmin >= 0.0) & (dmax <= span)
        gone = (dmax <= 0.0) | (dmin >= span)
        out += np.where(whole, mini_vol[vv], 0.0).sum(axis=1)

        straddle = ~(whole | gone)
        if straddle.any():
            e_idx, m_idx = np.nonzero(straddle)
            t_idx, k_idx = m_idx // 6, m_idx % 6
            corners = np.einsum("sjr,srd->sjd",
                                _MINI_WEIGHTS[t_idx, k_idx], P[vv[e_idx], t_idx])
            pieces = clip_tets_halfspace(corners, u[e_idx], np.zeros(len(corners)))
            pieces = pieces.reshape(-1, 4, 3)
            owner = np.repeat(e_idx, 3)
            dp = np.einsum("svd,sd->sv", pieces, u[owner])
            pmin, pmax = dp.min(axis=1), dp.max(axis=1)
            inside = pmax <= lengths[owner]
            vols = np.abs(_signed_volumes(pieces[inside]))
            out += np.bincount(owner[inside], weights=vols, minlength=E)
            cut = ~inside & (pmin < lengths[owner])
            if cut.any():
                sub = clip_tets_halfspace(pieces[cut], -u[owner[cut]], -lengths[owner[cut]])
                vols = np.abs(_signed_volumes(sub.reshape(-1, 4, 3)))
                out += np.bincount(np.repeat(owner[cut], 3), weights=vols, minlength=E)

    return out


# ---------------------------------------------------------------------------
# Neighbouring-edge table for the transverse curvature sum
# ---------------------------------------------------------------------------

@dataclass
class EdgePairTable:
    """Per-edge table of the 26 other edges meeting its two endpoints.

    ``cos_ray`` holds the cosine of the angle between the neighbour's ray and
    the edge's own ray out of the shared endpoint, measured in the endpoint's
    star frame.  ``include`` marks the neighbours that span a tetrahedron
    together with the edge itself.  Only those lie in the fan of tetrahedra
    hinging on the edge, and only they enter the transverse curvature sum;
    edges that merely touch an endpoint run through neighbouring fans and
    never cross the edge's own dual volume.
    """

    neighbor: np.ndarray   # (n_edges, 26) int
    cos_ray: np.ndarray    # (n_edges, 26) float
    include: np.ndarray    # (n_edges, 26) bool


def _spans_tet_mask(tri, neighbor):
    """Whether each listed neighbour shares a tetrahedron with its edge."""
    ring = tri.edge_tets                                  # (E, R) padded -1
    ring_edges = np.where(ring[..., None] >= 0,
                          tri.tet_edges[ring], -1)        # (E, R, 6)
    ring_edges = ring_edges.reshape(tri.n_edges, -1)
    return (neighbor[:, :, None] == ring_edges[:, None, :]).any(axis=2)


def edge_pair_table(tri, lengths, directions=None):
    lengths = np.asarray(lengths, dtype=float)
    if directions is None:
        directions = star_directions(tri, star_positions(tri, lengths))
    E = tri.n_edges
    rows = np.arange(E)
    role = tri.edge_role

    nbr, cos_ray = [], []
    for vv, own in ((tri.edges[:, 0], role), (tri.edges[:, 1], role + 7)):
        ids = tri.vertex_edges[vv]                       # (E, 14)
        dirs = directions[vv]                            # (E, 14, 3)
        u = dirs[rows, own] / lengths[:, None]
        li = lengths[ids]
        cosr = np.einsum("ekd,ed->ek", dirs, u) / li
        keep = np.ones((E, 14), dtype=bool)
        keep[rows, own] = False
        nbr.append(ids[keep].reshape(E, 13))
        cos_ray.append(cosr[keep].reshape(E, 13))

    neighbor = np.concatenate(nbr, axis=1)
    return EdgePairTable(
        neighbor=neighbor,
        cos_ray=np.concatenate(cos_ray, axis=1),
        include=_spans_tet_mask(tri, neighbor),
    )


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------

@dataclass
class DualVolumes:
    """Tetrahedron, vertex and edge dual volumes of one length configuration."""

    tet: np.ndarray
    vertex: np.ndarray
    edge: np.ndarray


def dual_volumes(tri, lengths, positions=None):
    lengths = np.asarray(lengths, dtype=float)
    tet_vols = tet_volumes(tet_edge_lengths(tri, lengths))
    if positions is None:
        positions = star_positions(tri, lengths)
    return DualVolumes(
        tet=tet_vols,
        vertex=vertex_dual_volumes(tri, tet_vols=tet_vols),
        edge=edge_dual_volumes(tri, lengths, positions=positions, tet_vols=tet_vols),
    )
