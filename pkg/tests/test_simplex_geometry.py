import numpy as np
import pytest

from reggeflow import build_torus, flat_lengths
from reggeflow.simplex_geometry import (
    deficit_angles,
    embed_block,
    inter_edge_angle,
    star_directions,
    star_positions,
    tet_edge_lengths,
    tet_volumes,
)


@pytest.mark.parametrize("kind", ["cubic", "skew"])
@pytest.mark.parametrize("c", [1.0, 1 / 3])
def test_flat_deficits_vanish(kind, c):
    tri = build_torus(kind, (3, 3, 3))
    eps = deficit_angles(tri, flat_lengths(tri, c))
    assert np.abs(eps).max() < 1e-12


@pytest.mark.parametrize("kind", ["cubic", "skew"])
def test_flat_tet_volumes(kind):
    tri = build_torus(kind, (3, 3, 3))
    for c in (1.0, 0.5):
        vols = tet_volumes(tet_edge_lengths(tri, flat_lengths(tri, c)))
        # six tets of equal volume fill each unit block
        np.testing.assert_allclose(vols, c ** 3 / 6.0, rtol=0, atol=1e-14)


def test_deficits_scale_invariant(cubic333):
    rng = np.random.default_rng(3)
    lengths = flat_lengths(cubic333) * (1 + 0.02 * rng.standard_normal(189))
    eps = deficit_angles(cubic333, lengths)
    eps_scaled = deficit_angles(cubic333, 0.37 * lengths)
    np.testing.assert_allclose(eps_scaled, eps, rtol=0, atol=1e-12)
    assert np.abs(eps).max() > 1e-3  # the perturbation is actually curved


def test_tet_edge_lengths_layout(cubic333):
    lengths = np.arange(cubic333.n_edges, dtype=float) + 1.0
    table = tet_edge_lengths(cubic333, lengths)
    assert table.shape == (cubic333.n_tets, 6)
    assert (table == lengths[cubic333.tet_edges]).all()


def test_inter_edge_angles_flat(cubic333):
    lengths = flat_lengths(cubic333)
    n = cubic333.n_blocks
    # axis x and axis y of the same block meet at a right angle
    assert inter_edge_angle(cubic333, lengths, 0, n) == pytest.approx(
        np.pi / 2, abs=1e-12)
    # axis x and the xy face diagonal of the same block meet at 45 degrees
    assert inter_edge_angle(cubic333, lengths, 0, 5 * n) == pytest.approx(
        np.pi / 4, abs=1e-12)


def test_star_positions_reproduce_edge_lengths(skew333):
    lengths = flat_lengths(skew333)
    P = star_positions(skew333, lengths)
    assert P.shape == (skew333.n_vertices, 24, 4, 3)
    # embedded tet edge lengths match the length table of the same tets
    table = tet_edge_lengths(skew333, lengths)
    for v in range(0, skew333.n_vertices, 9):
        for s in range(0, 24, 5):
            pts = P[v, s]
            tet = skew333.star_tets[v, s]
            got = np.sort([np.linalg.norm(pts[i] - pts[j])
                           for i in range(4) for j in range(i + 1, 4)])
            np.testing.assert_allclose(got, np.sort(table[tet]),
                                       rtol=0, atol=1e-10)


def test_star_directions_norms_and_opposites(cubic333):
    lengths = flat_lengths(cubic333)
    P = star_positions(cubic333, lengths)
    D = star_directions(cubic333, P)
    assert D.shape == (cubic333.n_vertices, 14, 3)
    norms = np.linalg.norm(D, axis=2)
    expected = lengths[cubic333.vertex_edges]
    np.testing.assert_allclose(norms, expected, rtol=0, atol=1e-12)
    # forward and backward directions of the same role are antiparallel
    for role in range(7):
        cos = np.sum(D[:, role] * D[:, role + 7], axis=1) \
            / (norms[:, role] * norms[:, role + 7])
        np.testing.assert_allclose(cos, -1.0, rtol=0, atol=1e-12)


@pytest.mark.parametrize("kind", ["cubic", "skew"])
def test_embed_block_flat(kind):
    tri = build_torus(kind, (3, 3, 3))
    lengths = flat_lengths(tri)
    emb = embed_block(tri, lengths, block=0)
    assert emb.converged
    assert emb.residual < 1e-10
    body = lengths[6 * tri.n_blocks]
    assert emb.diagonal_length == pytest.approx(body, abs=1e-10)


def test_embed_block_unconstrained_diagonal(cubic333):
    # without the body constraint the embedding still recovers the
    # flat-interior diagonal from the 18 boundary lengths
    lengths = flat_lengths(cubic333)
    rng = np.random.default_rng(11)
    lengths = lengths.copy()
    block = 4
    boundary = [e for e in cubic333.block_edges19[block]
                if cubic333.edge_role[e] != 6]
    lengths[boundary] *= 1 + 1e-4 * rng.standard_normal(len(boundary))
    emb = embed_block(cubic333, lengths, block, constrain_body=False)
    assert emb.converged
    assert emb.residual < 1e-10
    # the diagonal moves by about the size of the boundary perturbation
    assert abs(emb.diagonal_length - np.sqrt(3)) < 5e-4
