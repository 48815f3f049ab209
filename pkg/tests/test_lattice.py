import json

import numpy as np
import pytest

from reggeflow import build_torus, flat_lengths
from reggeflow.lattice import (
    EDGE_OFFSETS,
    EdgeRole,
    face_diagonal_coords,
    face_diagonal_index,
    mesh_from_json,
)
from reggeflow.reference import FLAT_LENGTHS


@pytest.mark.parametrize("kind", ["cubic", "skew"])
@pytest.mark.parametrize("dims", [(3, 3, 3), (3, 3, 4), (4, 4, 4)])
def test_counts(kind, dims):
    tri = build_torus(kind, dims)
    n = dims[0] * dims[1] * dims[2]
    assert tri.n_blocks == n
    assert tri.n_vertices == n
    assert tri.n_edges == 7 * n
    assert tri.n_tets == 6 * n
    assert tri.tets.shape == (6 * n, 4)
    assert tri.tet_edges.shape == (6 * n, 6)


def test_role_major_edge_layout(cubic333):
    n = cubic333.n_blocks
    coords = np.array([cubic333.vertex_coords[b] for b in range(n)])
    for role in EdgeRole:
        idx = role * n + np.arange(n)
        assert (cubic333.edge_role[idx] == role).all()
        assert (cubic333.edge_block[idx] == coords).all()
    assert cubic333.face_diagonal_slice == slice(3 * n, 6 * n)
    assert cubic333.body_diagonal_slice == slice(6 * n, 7 * n)


@pytest.mark.parametrize("kind", ["cubic", "skew"])
def test_ring_sizes(kind):
    tri = build_torus(kind, (3, 3, 3))
    expected = np.array([6, 6, 6, 4, 4, 4, 6])[tri.edge_role]
    assert (tri.edge_ring_size == expected).all()
    assert ((tri.edge_tets >= 0).sum(axis=1) == expected).all()


def test_edge_tets_consistent_with_tet_edges(cubic333):
    # every (edge, tet) incidence appears in both tables
    for edge in range(0, cubic333.n_edges, 17):
        ring = cubic333.edge_tets[edge]
        ring = ring[ring >= 0]
        assert len(set(ring.tolist())) == cubic333.edge_ring_size[edge]
        for tet in ring:
            assert edge in cubic333.tet_edges[tet]
    owners = [np.flatnonzero((cubic333.tet_edges == e).any(axis=1))
              for e in range(0, cubic333.n_edges, 29)]
    for e, tets in zip(range(0, cubic333.n_edges, 29), owners):
        assert set(tets.tolist()) == set(
            t for t in cubic333.edge_tets[e] if t >= 0)


def test_tets_are_consistent_simplices(cubic333):
    # four distinct vertices, six distinct edges, endpoints inside the tet
    tets = cubic333.tets
    assert all(len(set(t)) == 4 for t in tets.tolist())
    for tet, edges in zip(tets, cubic333.tet_edges):
        verts = set(tet.tolist())
        assert len(set(edges.tolist())) == 6
        for e in edges:
            assert set(cubic333.edges[e].tolist()) <= verts


def test_edge_endpoint_offsets(cubic333):
    # the far endpoint of an edge of each role sits at the role's offset
    dims = np.array(cubic333.dims)
    for role in EdgeRole:
        e = role * cubic333.n_blocks  # edge of block (0, 0, 0)
        v1, v2 = cubic333.edges[e]
        c1 = np.array(cubic333.vertex_coords[v1])
        c2 = np.array(cubic333.vertex_coords[v2])
        assert ((c1 + EDGE_OFFSETS[role]) % dims == c2 % dims).all()


def test_vertex_edges_table(cubic333):
    assert cubic333.vertex_edges.shape == (cubic333.n_vertices, 14)
    counts = np.zeros(cubic333.n_edges, dtype=int)
    for row in cubic333.vertex_edges:
        np.add.at(counts, row, 1)
    assert (counts == 2).all()  # each edge is incident to two vertices
    for v in range(0, cubic333.n_vertices, 7):
        incident = set(cubic333.vertex_edges[v].tolist())
        from_edges = set(
            np.flatnonzero((cubic333.edges == v).any(axis=1)).tolist())
        assert incident == from_edges


def test_block_edges19(cubic333):
    assert cubic333.block_edges19.shape == (cubic333.n_blocks, 19)
    for b in range(0, cubic333.n_blocks, 5):
        edges19 = set(cubic333.block_edges19[b].tolist())
        assert len(edges19) == 19
        tet_edges = set(
            cubic333.tet_edges[cubic333.block_tets[b]].ravel().tolist())
        assert tet_edges == edges19
        # the block's own seven edges are always present
        own = {r * cubic333.n_blocks + b for r in range(7)}
        assert own <= edges19


def test_face_diagonal_indexing(cubic333):
    n = cubic333.n_blocks
    for j in range(0, 3 * n, 11):
        kind, coords = face_diagonal_coords(cubic333, 3 * n + j)
        assert face_diagonal_index(cubic333, kind, coords) == 3 * n + j


def test_block_index_round_trip(cubic333):
    for b in range(cubic333.n_blocks):
        coords = tuple(cubic333.vertex_coords[b])
        assert cubic333.block_index(coords) == b


@pytest.mark.parametrize("dims", [(2, 3, 3), (3, 1, 3), (0, 0, 0)])
def test_small_grids_rejected(dims):
    with pytest.raises(ValueError):
        build_torus("cubic", dims)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        build_torus("hexagonal", (3, 3, 3))


@pytest.mark.parametrize("kind", ["cubic", "skew"])
def test_flat_lengths_reference_values(kind):
    tri = build_torus(kind, (3, 3, 3))
    lengths = flat_lengths(tri, 1.0)
    per_role = lengths[np.arange(7) * tri.n_blocks]
    np.testing.assert_allclose(per_role, FLAT_LENGTHS[kind], rtol=0, atol=1e-12)
    # uniform within a role, and the scale acts linearly
    assert (lengths == lengths[tri.edge_role * tri.n_blocks]).all()
    np.testing.assert_allclose(flat_lengths(tri, 1 / 3), lengths / 3,
                               rtol=0, atol=1e-15)


@pytest.mark.parametrize("kind", ["cubic", "skew"])
def test_mesh_json_round_trip(kind, tmp_path):
    tri = build_torus(kind, (3, 3, 4))
    text = tri.to_json()
    doc = json.loads(text)
    assert doc["counts"]["edges"] == tri.n_edges
    tri2 = mesh_from_json(text)
    assert tri2.kind == tri.kind
    assert tri2.dims == tri.dims
    assert (tri2.edges == tri.edges).all()
    assert (tri2.tets == tri.tets).all()
    assert (tri2.tet_edges == tri.tet_edges).all()
