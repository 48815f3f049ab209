"""Length-only simplex geometry: volumes, dihedral angles, deficit angles.

All bulk operations work on arrays of per-tetrahedron edge lengths in the
slot order (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).  Coordinates never
enter the main computations; they appear only in the embedding oracle
`embed_block` and in the local star frames used to unfold edge fans around
a vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from reggeflow.lattice import (
    STAR_TEMPLATE,
    TET_EDGE_SLOTS,
    BLOCK_EDGE_CORNERS,
    BLOCK_EDGE_TABLE,
    EdgeRole,
)

COS_CLAMP_TOL = 1e-12


class DegenerateSimplexError(ValueError):
    """A tetrahedron's lengths violate the Cayley-Menger positivity bound."""


# slot s holds edge (i, j); _SLOT_COMPLEMENT[s] holds the opposite edge (k, l)
_SLOT_COMPLEMENT = np.array([5, 4, 3, 2, 1, 0])
# faces are indexed by their omitted vertex; _FACE_SLOTS[m] lists the three
# length slots of face m
_FACE_SLOTS = np.array([[3, 4, 5], [1, 2, 5], [0, 2, 4], [0, 1, 3]])


def _clamped_cos(num, den, context="angle"):
    c = num / den
    bad = np.abs(c) > 1.0 + COS_CLAMP_TOL
    if np.any(bad):
        worst = float(np.abs(c[bad]).max()) if np.ndim(c) else float(abs(c))
        raise DegenerateSimplexError(
            f"cosine of {context} out of range by {worst - 1.0:.3e}"
        )
    return np.clip(c, -1.0, 1.0)


def _squared_distance_matrix(lengths6):
    L = np.asarray(lengths6, dtype=float)
    d2 = np.zeros(L.shape[:-1] + (4, 4))
    for s, (i, j) in enumerate(TET_EDGE_SLOTS):
        d2[..., i, j] = d2[..., j, i] = L[..., s] ** 2
    return d2


def tet_volumes(lengths6):
    """Cayley-Menger volume of each tetrahedron, given (..., 6) edge lengths."""
    d2 = _squared_distance_matrix(lengths6)
    m = np.zeros(d2.shape[:-2] + (5, 5))
    m[..., 0, 1:] = 1.0
    m[..., 1:, 0] = 1.0
    m[..., 1:, 1:] = d2
    det = np.linalg.det(m)
    scale = np.asarray(lengths6, dtype=float).max(axis=-1) ** 6
    bad = det <= 1e-14 * np.maximum(scale, 1e-300)
    if np.any(bad):
        idx = np.nonzero(np.atleast_1d(bad))[0][:5]
        raise DegenerateSimplexError(
            f"non-positive Cayley-Menger determinant at tetrahedra {idx.tolist()}"
        )
    return np.sqrt(det / 288.0)


def tet_volume(lengths6):
    """Volume of a single tetrahedron from its six edge lengths."""
    return float(tet_volumes(np.asarray(lengths6, dtype=float)[None, :])[0])


def face_areas(lengths6):
    """Heron areas of the four faces, indexed by omitted vertex: (..., 4)."""
    L2 = np.asarray(lengths6, dtype=float) ** 2
    a2 = L2[..., _FACE_SLOTS[:, 0]]
    b2 = L2[..., _FACE_SLOTS[:, 1]]
    c2 = L2[..., _FACE_SLOTS[:, 2]]
    sq = 2.0 * (a2 * b2 + b2 * c2 + c2 * a2) - a2**2 - b2**2 - c2**2
    if np.any(sq <= 0.0):
        raise DegenerateSimplexError("degenerate triangular face")
    return 0.25 * np.sqrt(sq)


def dihedral_angles(lengths6, volumes=None):
    """Interior dihedral angles at all six edges of each tetrahedron.

    Uses atan2 of a volume-based sine and a Gram (spherical law of cosines)
    cosine, both built purely from lengths, so the result is well conditioned
    across the whole (0, pi) range.
    """
    L = np.asarray(lengths6, dtype=float)
    d2 = _squared_distance_matrix(L)
    d = np.sqrt(d2)
    if volumes is None:
        volumes = tet_volumes(L)
    areas = face_areas(L)
    out = np.empty(L.shape)
    for s, (i, j) in enumerate(TET_EDGE_SLOTS):
        k, l = TET_EDGE_SLOTS[_SLOT_COMPLEMENT[s]]
        cos_a = _clamped_cos(d2[..., i, j] + d2[..., i, k] - d2[..., j, k],
                             2.0 * d[..., i, j] * d[..., i, k], "face corner")
        cos_b = _clamped_cos(d2[..., i, j] + d2[..., i, l] - d2[..., j, l],
                             2.0 * d[..., i, j] * d[..., i, l], "face corner")
        cos_g = _clamped_cos(d2[..., i, k] + d2[..., i, l] - d2[..., k, l],
                             2.0 * d[..., i, k] * d[..., i, l], "face corner")
        sin_a = np.sqrt(1.0 - cos_a**2)
        sin_b = np.sqrt(1.0 - cos_b**2)
        cos_t = (cos_g - cos_a * cos_b) / (sin_a * sin_b)
        sin_t = 1.5 * volumes * d[..., i, j] / (areas[..., k] * areas[..., l])
        out[..., s] = np.arctan2(sin_t, cos_t)
    return out


def dihedral_angle(lengths6, slot):
    """Dihedral angle at one edge slot of a single tetrahedron."""
    if not 0 <= int(slot) < 6:
        raise ValueError(f"edge slot must be 0..5, got {slot}")
    return float(dihedral_angles(np.asarray(lengths6, dtype=float)[None, :])[0, int(slot)])


def tet_edge_lengths(tri, lengths):
    """Per-tetrahedron slot lengths gathered from the global edge array."""
    return np.asarray(lengths, dtype=float)[tri.tet_edges]


def deficit_angles(tri, lengths):
    """Deficit angle 2*pi - sum of incident dihedral angles, for every edge."""
    th = dihedral_angles(tet_edge_lengths(tri, lengths))
    sums = np.bincount(tri.tet_edges.ravel(), weights=th.ravel(), minlength=tri.n_edges)
    return 2.0 * np.pi - sums


def deficit_angle(tri, lengths, edge):
    """Deficit angle of a single edge from its ring of tetrahedra."""
    edge = int(edge)
    ring = tri.edge_tets[edge, : tri.edge_ring_size[edge]]
    L = np.asarray(lengths, dtype=float)[tri.tet_edges[ring]]
    th = dihedral_angles(L)
    slots = np.array([int(np.nonzero(tri.tet_edges[t] == edge)[0][0]) for t in ring])
    return float(2.0 * np.pi - th[np.arange(len(ring)), slots].sum())


# ---------------------------------------------------------------------------
# Vertex star frames
# ---------------------------------------------------------------------------

def _trilaterate(q0, q1, q2, r0, r1, r2, q_opposite):
    """Place a point at given distances from q0, q1, q2, on the side of the
    plane (q0, q1, q2) away from q_opposite.  All inputs (..., 3)."""
    ex = q1 - q0
    d = np.linalg.norm(ex, axis=-1, keepdims=True)
    ex = ex / d
    v2 = q2 - q0
    i = np.sum(v2 * ex, axis=-1, keepdims=True)
    ey = v2 - i * ex
    j = np.linalg.norm(ey, axis=-1, keepdims=True)
    ey = ey / j
    ez = np.cross(ex, ey)
    d = d[..., 0]
    i = i[..., 0]
    j = j[..., 0]
    x = (r0**2 - r1**2 + d**2) / (2.0 * d)
    y = (r0**2 - r2**2 + i**2 + j**2 - 2.0 * i * x) / (2.0 * j)
    z2 = r0**2 - x**2 - y**2
    if np.any(z2 < -1e-10 * np.maximum(r0**2, 1.0)):
        raise DegenerateSimplexError("trilateration failed: flattened tetrahedron")
    z = np.sqrt(np.maximum(z2, 0.0))
    side = np.sum((q_opposite - q0) * ez, axis=-1)
    z = -np.sign(side) * z
    return q0 + x[..., None] * ex + y[..., None] * ey + z[..., None] * ez


def star_positions(tri, lengths):
    """Unfold every vertex star into a local Euclidean frame.

    Returns (n, 24, 4, 3) positions with the star's centre vertex at the
    origin of every tetrahedron copy.  Each tetrahedron is embedded exactly
    isometrically; where the star carries deficit angles, vertices reached
    along different unfolding paths disagree at order deficit, which is the
    usual ambiguity of a locally flat chart around a cone edge.
    """
    st = STAR_TEMPLATE
    lengths = np.asarray(lengths, dtype=float)
    n = tri.n_vertices
    Ls = lengths[tri.star_edge_idx]  # (n, 24, 6)
    P = np.zeros((n, 24, 4, 3))

    b = st.base_tet
    L01, L02, L03 = Ls[:, b, 0], Ls[:, b, 1], Ls[:, b, 2]
    L12, L13, L23 = Ls[:, b, 3], Ls[:, b, 4], Ls[:, b, 5]
    p0 = np.zeros((n, 3))
    p1 = np.zeros((n, 3))
    p1[:, 0] = L01
    cos_a = _clamped_cos(L01**2 + L02**2 - L12**2, 2.0 * L01 * L02, "base corner")
    p2 = np.zeros((n, 3))
    p2[:, 0] = L02 * cos_a
    p2[:, 1] = L02 * np.sqrt(1.0 - cos_a**2)
    # place the fourth corner above the (p0, p1, p2) plane
    below = np.zeros((n, 3))
    below[:, 2] = -1.0
    p3 = _trilaterate(p0, p1, p2, L03, L13, L23, below)
    P[:, b, 0], P[:, b, 1], P[:, b, 2], P[:, b, 3] = p0, p1, p2, p3

    for step in st.steps:
        t = step["tet"]
        par = step["parent"]
        sp = step["shared_slots_parent"]
        sn = step["shared_slots"]
        rs = step["rad_slots"]
        q0 = P[:, par, sp[0]]
        q1 = P[:, par, sp[1]]
        q2 = P[:, par, sp[2]]
        q_opp = P[:, par, step["opposite_parent_slot"]]
        new = _trilaterate(q0, q1, q2, Ls[:, t, rs[0]], Ls[:, t, rs[1]], Ls[:, t, rs[2]], q_opp)
        P[:, t, sn[0]] = q0
        P[:, t, sn[1]] = q1
        P[:, t, sn[2]] = q2
        P[:, t, step["new_slot"]] = new
    return P


def star_directions(tri, P):
    """First-occurrence positions of the 14 incident edge endpoints, (n, 14, 3).

    Row order matches tri.vertex_edges: the seven forward roles, then the
    seven backward roles.
    """
    lk = STAR_TEMPLATE.direction_lookup
    return P[:, lk[:, 0], lk[:, 1], :]


def _edge_between(tri, va, vb):
    for d in range(14):
        e = tri.vertex_edges[va, d]
        u, w = tri.edges[e]
        other = w if u == va else u
        if other == vb:
            return int(e)
    return -1


def inter_edge_angle(tri, lengths, edge_a, edge_b):
    """Angle at the shared vertex between two edges, as rays from that vertex.

    If the two edges lie in a common tetrahedron this is the plain
    law-of-cosines angle of the triangle they span.  Otherwise the angle is
    read from the unfolded star frame of the shared vertex.
    """
    lengths = np.asarray(lengths, dtype=float)
    ea, eb = int(edge_a), int(edge_b)
    if ea == eb:
        raise ValueError("inter-edge angle of an edge with itself")
    sa = set(tri.edges[ea].tolist())
    sb = set(tri.edges[eb].tolist())
    shared = sa & sb
    if not shared:
        raise ValueError(f"edges {ea} and {eb} do not share a vertex")
    v = shared.pop()
    other_a = (sa - {v}).pop()
    other_b = (sb - {v}).pop()
    ring_a = set(tri.edge_tets[ea, : tri.edge_ring_size[ea]].tolist())
    ring_b = set(tri.edge_tets[eb, : tri.edge_ring_size[eb]].tolist())
    if ring_a & ring_b:
        # the edges span a triangle of a common tetrahedron: law of cosines
        closing = _edge_between(tri, other_a, other_b)
        la, lb, lab = lengths[ea], lengths[eb], lengths[closing]
        return float(np.arccos(_clamped_cos(la**2 + lb**2 - lab**2, 2.0 * la * lb)))
    P = star_positions(tri, lengths)
    D = star_directions(tri, P)
    da = int(np.nonzero(tri.vertex_edges[v] == ea)[0][0])
    db = int(np.nonzero(tri.vertex_edges[v] == eb)[0][0])
    cos = np.dot(D[v, da], D[v, db]) / (lengths[ea] * lengths[eb])
    return float(np.arccos(_clamped_cos(np.asarray(cos), 1.0)))


# ---------------------------------------------------------------------------
# Coordinate-embedding oracle for one block
# ---------------------------------------------------------------------------

@dataclass
class BlockEmbedding:
    """Least-squares Euclidean embedding of one block's eight corners."""

    points: np.ndarray          # (8, 3)
    residual: float             # max |distance - target| over constraints
    diagonal_length: float      # |corner7 - corner0|
    start_spread: float         # diagonal disagreement between the two starts
    converged: bool


def _gauge_params(points):
    p = points - points[0]
    ex = p[1] / np.linalg.norm(p[1])
    v = p[2] - np.dot(p[2], ex) * ex
    ey = v / np.linalg.norm(v)
    ez = np.cross(ex, ey)
    R = np.stack([ex, ey, ez], axis=1)
    q = p @ R
    return np.concatenate([[q[1, 0], q[2, 0], q[2, 1]], q[3:].ravel()])


def _gauge_points(params):
    pts = np.zeros((8, 3))
    pts[1, 0] = params[0]
    pts[2, 0] = params[1]
    pts[2, 1] = params[2]
    pts[3:] = params[3:].reshape(5, 3)
    return pts


def embed_block(tri, lengths, block, constrain_body=True, seed=0):
    """Embed the eight corners of one block to match its 19 edge lengths.

    With constrain_body=False the body diagonal is left free and its length
    is read off the embedding afterwards; this is the independent oracle for
    the flattening solve.  Several starts (the flat template plus jittered
    copies) are run; the spread of the diagonal readings across the starts
    that actually converged is reported as a non-uniqueness diagnostic.
    """
    lengths = np.asarray(lengths, dtype=float)
    idx = tri.block_edges19[int(block)]
    targets = lengths[idx]
    pairs = list(BLOCK_EDGE_CORNERS)
    assert BLOCK_EDGE_TABLE[-1][2] == int(EdgeRole.BODY)
    if not constrain_body:
        pairs = pairs[:-1]
        targets = targets[:-1]
    pa = np.array([p[0] for p in pairs])
    pb = np.array([p[1] for p in pairs])

    def residuals(params):
        pts = _gauge_points(params)
        d = np.linalg.norm(pts[pa] - pts[pb], axis=1)
        return d - targets

    scale = float(np.mean(targets / np.linalg.norm(
        tri.template.corner_coords[pa] - tri.template.corner_coords[pb], axis=1)))
    base = tri.template.corner_coords * scale
    rng = np.random.default_rng(seed)
    starts = [base] + [
        base * (1.0 + 0.08 * rng.uniform(-1.0, 1.0, size=base.shape))
        for _ in range(3)
    ]

    sols = []
    for s in starts:
        res = least_squares(residuals, _gauge_params(s), method="trf",
                            xtol=3e-16, ftol=3e-16, gtol=3e-16, max_nfev=2000)
        sols.append(res)
    finals = [_gauge_points(r.x) for r in sols]
    diags = np.array([np.linalg.norm(p[7] - p[0]) for p in finals])
    resid = np.array([np.abs(r.fun).max() for r in sols])
    best = int(np.argmin(resid))
    tol = max(1e-10 * scale, 10.0 * resid[best])
    good = diags[resid <= tol]
    return BlockEmbedding(
        points=finals[best],
        residual=float(resid[best]),
        diagonal_length=float(diags[best]),
        start_spread=float(good.max() - good.min()),
        converged=bool(resid[best] <= 1e-9 * scale),
    )
