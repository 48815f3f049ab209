"""Periodic triangulations of the 3-torus built from parallelepiped blocks.

Each block is spanned by three basis vectors and carries seven independent
edges: three axis edges along the basis vectors, three face diagonals and
one body diagonal.  The block is divided into six tetrahedra around the
body diagonal, one per ordering of the three axes, so that every pair of
opposite block faces carries parallel face diagonals and the tiling of the
torus is consistent.

Edge indexing is role-major: all axis-x edges first (ordered
lexicographically by block coordinate), then axis-y, axis-z, then the
yz / zx / xy face diagonals, then the body diagonals.  Face diagonals
therefore occupy the contiguous index range [3n, 6n) for n blocks, which
the stability module relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

MESH_SCHEMA = "reggeflow.mesh/1"


class BlockKind(IntEnum):
    CUBIC = 0
    SKEW = 1


class EdgeRole(IntEnum):
    AXIS_X = 0
    AXIS_Y = 1
    AXIS_Z = 2
    DIAG_YZ = 3
    DIAG_ZX = 4
    DIAG_XY = 5
    BODY = 6


FACE_DIAGONAL_ROLES = (EdgeRole.DIAG_YZ, EdgeRole.DIAG_ZX, EdgeRole.DIAG_XY)

# Lattice offset of the far endpoint of each edge role, in role order.
EDGE_OFFSETS = np.array(
    [
        [1, 0, 0],  # AXIS_X
        [0, 1, 0],  # AXIS_Y
        [0, 0, 1],  # AXIS_Z
        [0, 1, 1],  # DIAG_YZ
        [1, 0, 1],  # DIAG_ZX
        [1, 1, 0],  # DIAG_XY
        [1, 1, 1],  # BODY
    ],
    dtype=np.int64,
)

_OFFSET_TO_ROLE = {tuple(off): r for r, off in enumerate(EDGE_OFFSETS.tolist())}

# The six axis orderings defining the block's tetrahedra.  Ordering (a, b, c)
# yields the tetrahedron with corners  base, base+e_a, base+e_a+e_b,
# base+e_a+e_b+e_c.  Odd orderings get their last two corners swapped so
# every tetrahedron is positively oriented in the block basis.
AXIS_ORDERINGS = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))

TET_EDGE_SLOTS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

_E = np.eye(3, dtype=np.int64)


def _ordering_parity(p):
    a, b, c = p
    return +1 if (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1


def _tet_corner_offsets(p):
    """Corner lattice offsets (relative to the block base) for ordering p."""
    a, b, c = p
    corners = [np.zeros(3, np.int64), _E[a], _E[a] + _E[b], _E[a] + _E[b] + _E[c]]
    if _ordering_parity(p) < 0:
        corners[2], corners[3] = corners[3], corners[2]
    return corners


@dataclass(frozen=True)
class BlockTemplate:
    """Geometric template for one block kind: basis vectors and flat lengths."""

    kind: BlockKind
    basis: np.ndarray  # (3, 3), rows are the block basis vectors

    @property
    def corner_coords(self):
        """Coordinates of the 8 block corners, indexed cx + 2*cy + 4*cz."""
        corners = np.array(
            [[cx, cy, cz] for cz in (0, 1) for cy in (0, 1) for cx in (0, 1)]
        )
        corners = corners[np.argsort(corners[:, 0] + 2 * corners[:, 1] + 4 * corners[:, 2])]
        return corners @ self.basis

    def flat_role_lengths(self):
        """Flat edge length of each role for a unit-volume block."""
        return np.linalg.norm(EDGE_OFFSETS @ self.basis, axis=1)

    def block_volume(self):
        return float(abs(np.linalg.det(self.basis)))


CUBIC_TEMPLATE = BlockTemplate(BlockKind.CUBIC, np.eye(3))
SKEW_TEMPLATE = BlockTemplate(
    BlockKind.SKEW,
    np.array(
        [
            [1.0, -1.0 / 3.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0 / 3.0, -2.0 / 9.0, 1.0],
        ]
    ),
)

TEMPLATES = {BlockKind.CUBIC: CUBIC_TEMPLATE, BlockKind.SKEW: SKEW_TEMPLATE}


# ---------------------------------------------------------------------------
# The 19 edges touching one block: 12 cube edges, 6 face diagonals, 1 body
# diagonal.  Local corners are numbered cx + 2*cy + 4*cz.  Each entry is
# (corner_a, corner_b, role, block_offset): the edge is the `role` edge of
# the block displaced by `block_offset` from this one.
# ---------------------------------------------------------------------------

def _block_edge_table():
    table = []
    # axis edges, four parallel copies each
    for role, axis in ((EdgeRole.AXIS_X, 0), (EdgeRole.AXIS_Y, 1), (EdgeRole.AXIS_Z, 2)):
        others = [i for i in range(3) if i != axis]
        for u in (0, 1):
            for w in (0, 1):
                off = np.zeros(3, np.int64)
                off[others[0]], off[others[1]] = u, w
                a = off.copy()
                b = off + _E[axis]
                table.append((a, b, int(role), off))
    # face diagonals, two parallel copies each (far copy belongs to a neighbour)
    for role, normal in (
        (EdgeRole.DIAG_YZ, 0),
        (EdgeRole.DIAG_ZX, 1),
        (EdgeRole.DIAG_XY, 2),
    ):
        for s in (0, 1):
            off = s * _E[normal]
            a = off.copy()
            b = off + EDGE_OFFSETS[role]
            table.append((a, b, int(role), off))
    table.append((np.zeros(3, np.int64), np.ones(3, np.int64), int(EdgeRole.BODY), np.zeros(3, np.int64)))
    return table


BLOCK_EDGE_TABLE = _block_edge_table()  # 19 entries


def _corner_id(c):
    return int(c[0] + 2 * c[1] + 4 * c[2])


BLOCK_EDGE_CORNERS = [( _corner_id(a), _corner_id(b)) for a, b, _, _ in BLOCK_EDGE_TABLE]


# ---------------------------------------------------------------------------
# Vertex star template: the 24 tetrahedra containing a lattice vertex, a
# breadth-first unfolding order over faces containing the vertex, and
# first-occurrence lookups for the 14 incident edge directions.  This is
# pure combinatorics, shared by every vertex and both block kinds.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarTemplate:
    tets: tuple            # ((block_offset, ordering_index), ...) length 24
    corners: np.ndarray    # (24, 4, 3) lattice offsets of each tet corner
    origin_slot: np.ndarray  # (24,) corner slot holding the star's centre
    edge_desc: np.ndarray  # (24, 6, 4) per tet edge slot: role, block offset
    base_tet: int          # star tet embedded first
    steps: tuple           # unfolding steps, see _build_star_template
    direction_lookup: np.ndarray  # (14, 2) first (star tet, corner slot) per direction
    directions: np.ndarray  # (14, 3) lattice offsets: 7 forward roles then 7 backward


def _edge_from_lattice_pair(u, w):
    """(role, base block) of the edge joining lattice points u and w."""
    d = tuple(int(x) for x in (w - u))
    if d in _OFFSET_TO_ROLE:
        return _OFFSET_TO_ROLE[d], np.asarray(u, dtype=np.int64)
    dneg = tuple(-x for x in d)
    if dneg in _OFFSET_TO_ROLE:
        return _OFFSET_TO_ROLE[dneg], np.asarray(w, dtype=np.int64)
    raise ValueError(f"lattice points {u} and {w} are not joined by an edge")


def _build_star_template():
    origin = np.zeros(3, np.int64)
    tets = []
    corners = []
    for bx in (-1, 0):
        for by in (-1, 0):
            for bz in (-1, 0):
                boff = np.array([bx, by, bz], np.int64)
                for p_idx, p in enumerate(AXIS_ORDERINGS):
                    cs = [boff + c for c in _tet_corner_offsets(p)]
                    if any(np.array_equal(c, origin) for c in cs):
                        tets.append((tuple(boff.tolist()), p_idx))
                        corners.append(np.stack(cs))
    corners = np.stack(corners)
    ntet = len(tets)
    assert ntet == 24

    origin_slot = np.array(
        [next(k for k in range(4) if np.array_equal(corners[t, k], origin)) for t in range(ntet)],
        dtype=np.int64,
    )

    edge_desc = np.zeros((ntet, 6, 4), np.int64)
    for t in range(ntet):
        for s, (i, j) in enumerate(TET_EDGE_SLOTS):
            role, base = _edge_from_lattice_pair(corners[t, i], corners[t, j])
            edge_desc[t, s, 0] = role
            edge_desc[t, s, 1:] = base

    # adjacency through triangles containing the origin
    def corner_set(t):
        return {tuple(c.tolist()) for c in corners[t]}

    sets = [corner_set(t) for t in range(ntet)]
    adj = [[] for _ in range(ntet)]
    for a in range(ntet):
        for b in range(a + 1, ntet):
            common = sets[a] & sets[b]
            if len(common) == 3 and (0, 0, 0) in common:
                adj[a].append(b)
                adj[b].append(a)

    base_tet = tets.index(((0, 0, 0), 0))
    visited = {base_tet}
    queue = [base_tet]
    steps = []
    while queue:
        cur = queue.pop(0)
        for nxt in sorted(adj[cur]):
            if nxt in visited:
                continue
            visited.add(nxt)
            queue.append(nxt)
            shared = sets[cur] & sets[nxt]
            new_corner = next(k for k in range(4) if tuple(corners[nxt, k].tolist()) not in shared)
            shared_slots_next = [k for k in range(4) if k != new_corner]
            shared_slots_cur = [
                next(k for k in range(4) if np.array_equal(corners[cur, k], corners[nxt, j]))
                for j in shared_slots_next
            ]
            opposite_cur = next(
                k for k in range(4) if tuple(corners[cur, k].tolist()) not in shared
            )
            # edge slots in `nxt` joining the new corner to the three shared ones
            rad_slots = [
                TET_EDGE_SLOTS.index(tuple(sorted((new_corner, j)))) for j in shared_slots_next
            ]
            steps.append(
                {
                    "tet": nxt,
                    "parent": cur,
                    "shared_slots_parent": tuple(shared_slots_cur),
                    "shared_slots": tuple(shared_slots_next),
                    "new_slot": new_corner,
                    "rad_slots": tuple(rad_slots),
                    "opposite_parent_slot": opposite_cur,
                }
            )
    assert len(visited) == ntet

    directions = np.vstack([EDGE_OFFSETS, -EDGE_OFFSETS])
    lookup = np.full((14, 2), -1, np.int64)
    order = [base_tet] + [s["tet"] for s in steps]
    for t in order:
        for k in range(4):
            c = tuple(corners[t, k].tolist())
            for d in range(14):
                if lookup[d, 0] < 0 and c == tuple(directions[d].tolist()):
                    lookup[d] = (t, k)
    assert (lookup[:, 0] >= 0).all()

    return StarTemplate(
        tets=tuple(tets),
        corners=corners,
        origin_slot=origin_slot,
        edge_desc=edge_desc,
        base_tet=base_tet,
        steps=tuple(steps),
        direction_lookup=lookup,
        directions=directions,
    )


STAR_TEMPLATE = _build_star_template()


# ---------------------------------------------------------------------------
# Torus triangulation
# ---------------------------------------------------------------------------

@dataclass
class TorusTriangulation:
    """A triangulated 3-torus of nx*ny*nz blocks with full adjacency tables."""

    kind: BlockKind
    dims: tuple
    vertex_coords: np.ndarray      # (n, 3) block coordinate of each vertex
    edges: np.ndarray              # (7n, 2) endpoint vertex ids, base first
    edge_role: np.ndarray          # (7n,)
    edge_block: np.ndarray         # (7n, 3) block coordinate of each edge
    tets: np.ndarray               # (6n, 4) vertex ids, positively oriented
    tet_edges: np.ndarray          # (6n, 6) edge index per slot pair
    triangles: np.ndarray          # (12n, 3) sorted vertex ids
    triangle_tets: np.ndarray      # (12n, 2)
    edge_tets: np.ndarray          # (7n, 6) ring in cyclic order, -1 padded
    edge_ring_size: np.ndarray     # (7n,)
    vertex_edges: np.ndarray       # (n, 14) incident edges: 7 forward, 7 backward
    block_edges: np.ndarray        # (n, 7)
    block_tets: np.ndarray         # (n, 6)
    block_edges19: np.ndarray      # (n, 19) the BLOCK_EDGE_TABLE instantiated
    star_tets: np.ndarray = field(repr=False, default=None)        # (n, 24)
    star_edge_idx: np.ndarray = field(repr=False, default=None)    # (n, 24, 6)
    star_vertex_ids: np.ndarray = field(repr=False, default=None)  # (n, 24, 4)

    @property
    def n_blocks(self):
        return int(np.prod(self.dims))

    @property
    def n_vertices(self):
        return self.vertex_coords.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    @property
    def n_tets(self):
        return self.tets.shape[0]

    @property
    def template(self):
        return TEMPLATES[self.kind]

    @property
    def face_diagonal_slice(self):
        n = self.n_blocks
        return slice(3 * n, 6 * n)

    @property
    def body_diagonal_slice(self):
        n = self.n_blocks
        return slice(6 * n, 7 * n)

    def block_index(self, coords):
        nx, ny, nz = self.dims
        c = np.asarray(coords, dtype=np.int64)
        return (c[..., 0] % nx) * (ny * nz) + (c[..., 1] % ny) * nz + (c[..., 2] % nz)

    def edge_index(self, role, coords):
        return int(role) * self.n_blocks + self.block_index(coords)

    def to_json(self):
        payload = {
            "schema": MESH_SCHEMA,
            "kind": self.kind.name.lower(),
            "dims": list(self.dims),
            "counts": {
                "vertices": self.n_vertices,
                "edges": self.n_edges,
                "triangles": int(self.triangles.shape[0]),
                "tetrahedra": self.n_tets,
            },
            "edges": self.edges.tolist(),
            "edge_role": self.edge_role.tolist(),
            "edge_block": self.edge_block.tolist(),
            "tetrahedra": self.tets.tolist(),
        }
        return json.dumps(payload, indent=1, sort_keys=True)


def build_torus(kind, dims) -> TorusTriangulation:
    """Build the periodic block triangulation for `dims` = (nx, ny, nz).

    All three dimensions must be at least 3 so that no edge ring or vertex
    star picks up duplicate identifications around the torus.
    """
    if isinstance(kind, str):
        try:
            kind = BlockKind[kind.upper()]
        except KeyError:
            raise ValueError(f"unknown block kind {kind!r}") from None
    kind = BlockKind(kind)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 3 for d in dims):
        raise ValueError(f"grid dims must be three values >= 3, got {dims}")

    nx, ny, nz = dims
    n = nx * ny * nz

    gx, gy, gz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    vertex_coords = np.stack([gx, gy, gz], axis=-1).reshape(n, 3).astype(np.int64)

    def vid(coords):
        c = np.asarray(coords, dtype=np.int64)
        return (c[..., 0] % nx) * (ny * nz) + (c[..., 1] % ny) * nz + (c[..., 2] % nz)

    # edges, role-major
    edges = np.empty((7 * n, 2), np.int64)
    edge_role = np.repeat(np.arange(7, dtype=np.int64), n)
    edge_block = np.tile(vertex_coords, (7, 1))
    for role in range(7):
        sl = slice(role * n, (role + 1) * n)
        edges[sl, 0] = np.arange(n)
        edges[sl, 1] = vid(vertex_coords + EDGE_OFFSETS[role])

    # tetrahedra
    tets = np.empty((6 * n, 4), np.int64)
    tet_edges = np.empty((6 * n, 6), np.int64)
    corner_offsets = [np.stack(_tet_corner_offsets(p)) for p in AXIS_ORDERINGS]
    for p_idx in range(6):
        cs = corner_offsets[p_idx]  # (4, 3)
        rows = np.arange(n) * 6 + p_idx
        lattice = vertex_coords[:, None, :] + cs[None, :, :]  # (n, 4, 3)
        tets[rows] = vid(lattice)
        for s, (i, j) in enumerate(TET_EDGE_SLOTS):
            role, base = _edge_from_lattice_pair(cs[i], cs[j])
            tet_edges[rows, s] = role * n + vid(vertex_coords + base)

    # triangles from tet faces
    faces = []
    for a, b, c in ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)):
        faces.append(np.sort(tets[:, (a, b, c)], axis=1))
    faces = np.concatenate(faces, axis=0)
    face_tet = np.tile(np.arange(6 * n), 4)
    triangles, inverse = np.unique(faces, axis=0, return_inverse=True)
    if triangles.shape[0] != 12 * n:
        raise AssertionError(
            f"expected {12 * n} triangles, found {triangles.shape[0]}"
        )
    triangle_tets = np.full((12 * n, 2), -1, np.int64)
    for f_idx, t_idx in zip(inverse, face_tet):
        if triangle_tets[f_idx, 0] < 0:
            triangle_tets[f_idx, 0] = t_idx
        elif triangle_tets[f_idx, 1] < 0:
            triangle_tets[f_idx, 1] = t_idx
        else:
            raise AssertionError("triangle shared by more than two tetrahedra")
    if (triangle_tets < 0).any():
        raise AssertionError("boundary triangle found in a closed torus")

    # edge rings in cyclic order
    ring_lists = [[] for _ in range(7 * n)]
    for t in range(6 * n):
        for s in range(6):
            ring_lists[tet_edges[t, s]].append((t, s))
    edge_tets = np.full((7 * n, 6), -1, np.int64)
    edge_ring_size = np.zeros(7 * n, np.int64)
    for e in range(7 * n):
        members = [t for t, _ in ring_lists[e]]
        u, w = edges[e]
        # Each ring tet touches the edge through two triangles (u, w, x); the
        # map x -> pair of tets makes the ring a 2-regular cycle to walk.
        third = {}
        for t in members:
            for k in range(4):
                v3 = tets[t, k]
                if v3 != u and v3 != w:
                    third.setdefault(v3, []).append(t)
        for v3, ts in third.items():
            if len(ts) != 2:
                raise AssertionError(f"edge {e}: triangle fan not closed at vertex {v3}")
        start = members[0]
        ring = [start]
        used = set()
        cur = start
        while True:
            v3 = next(
                (v for k in range(4) if (v := tets[cur, k]) != u and v != w and v not in used),
                None,
            )
            if v3 is None:
                break
            used.add(v3)
            a, b = third[v3]
            nxt = b if a == cur else a
            if nxt == start:
                break
            ring.append(nxt)
            cur = nxt
        if len(ring) != len(members):
            raise AssertionError(f"edge {e}: ring walk visited {len(ring)} of {len(members)} tets")
        edge_ring_size[e] = len(ring)
        edge_tets[e, : len(ring)] = ring

    # vertex -> incident edges, forward roles then backward roles
    vertex_edges = np.empty((n, 14), np.int64)
    for role in range(7):
        vertex_edges[:, role] = role * n + np.arange(n)
        vertex_edges[:, 7 + role] = role * n + vid(vertex_coords - EDGE_OFFSETS[role])

    block_edges = np.stack([role * n + np.arange(n) for role in range(7)], axis=1)
    block_tets = np.arange(n)[:, None] * 6 + np.arange(6)[None, :]

    block_edges19 = np.empty((n, 19), np.int64)
    for col, (_, _, role, off) in enumerate(BLOCK_EDGE_TABLE):
        block_edges19[:, col] = role * n + vid(vertex_coords + off)

    tri = TorusTriangulation(
        kind=kind,
        dims=dims,
        vertex_coords=vertex_coords,
        edges=edges,
        edge_role=edge_role,
        edge_block=edge_block,
        tets=tets,
        tet_edges=tet_edges,
        triangles=triangles,
        triangle_tets=triangle_tets,
        edge_tets=edge_tets,
        edge_ring_size=edge_ring_size,
        vertex_edges=vertex_edges,
        block_edges=block_edges,
        block_tets=block_tets,
        block_edges19=block_edges19,
    )

    # instantiate the star template
    st = STAR_TEMPLATE
    star_tets = np.empty((n, 24), np.int64)
    star_edge_idx = np.empty((n, 24, 6), np.int64)
    star_vertex_ids = np.empty((n, 24, 4), np.int64)
    for t, (boff, p_idx) in enumerate(st.tets):
        star_tets[:, t] = vid(vertex_coords + np.asarray(boff)) * 6 + p_idx
        for k in range(4):
            star_vertex_ids[:, t, k] = vid(vertex_coords + st.corners[t, k])
        for s in range(6):
            role = st.edge_desc[t, s, 0]
            base = st.edge_desc[t, s, 1:]
            star_edge_idx[:, t, s] = role * n + vid(vertex_coords + base)
    tri.star_tets = star_tets
    tri.star_edge_idx = star_edge_idx
    tri.star_vertex_ids = star_vertex_ids

    _validate(tri)
    return tri


def _validate(tri):
    n = tri.n_blocks
    expected_ring = {0: 6, 1: 6, 2: 6, 3: 4, 4: 4, 5: 4, 6: 6}
    for role in range(7):
        sizes = tri.edge_ring_size[role * n : (role + 1) * n]
        if not (sizes == expected_ring[role]).all():
            raise AssertionError(f"role {role}: unexpected ring sizes {set(sizes.tolist())}")
    # Euler characteristic of a closed 3-manifold
    chi = tri.n_vertices - tri.n_edges + tri.triangles.shape[0] - tri.n_tets
    if chi != 0:
        raise AssertionError(f"Euler characteristic {chi} != 0")
    # each body diagonal ring must stay inside its own block
    body = np.arange(6 * n, 7 * n)
    ring = tri.edge_tets[body, :6]
    if not (ring // 6 == tri.block_index(tri.edge_block[body])[:, None]).all():
        raise AssertionError("body diagonal ring leaves its block")


def flat_lengths(tri, c=1.0):
    """Edge lengths of the flat (zero deficit) configuration at block scale c."""
    role_lengths = tri.template.flat_role_lengths() * float(c)
    return role_lengths[tri.edge_role]


def face_diagonal_index(tri, coords, diag):
    """Edge index of the `diag` face diagonal of the block at `coords`.

    `diag` is one of "yz", "zx", "xy" (or an EdgeRole).
    """
    if isinstance(diag, str):
        diag = EdgeRole[f"DIAG_{diag.upper()}"]
    diag = EdgeRole(diag)
    if diag not in FACE_DIAGONAL_ROLES:
        raise ValueError(f"{diag!r} is not a face diagonal role")
    return tri.edge_index(diag, coords)


def face_diagonal_coords(tri, edge_index):
    """Inverse of face_diagonal_index: (coords, role name) of a face diagonal."""
    role = EdgeRole(int(tri.edge_role[edge_index]))
    if role not in FACE_DIAGONAL_ROLES:
        raise ValueError(f"edge {edge_index} has role {role.name}, not a face diagonal")
    coords = tuple(int(x) for x in tri.edge_block[edge_index])
    return coords, role.name.removeprefix("DIAG_").lower()


def mesh_from_json(text):
    """Rebuild a triangulation from its JSON export, cross-checking tables."""
    payload = json.loads(text)
    if payload.get("schema") != MESH_SCHEMA:
        raise ValueError(f"unsupported mesh schema {payload.get('schema')!r}")
    tri = build_torus(payload["kind"], payload["dims"])
    stored_edges = np.asarray(payload["edges"], dtype=np.int64)
    stored_tets = np.asarray(payload["tetrahedra"], dtype=np.int64)
    if not np.array_equal(stored_edges, tri.edges) or not np.array_equal(stored_tets, tri.tets):
        raise ValueError("mesh JSON tables are inconsistent with the deterministic builder")
    return tri
