import json

import numpy as np
import pytest

from reggeflow import build_torus, flat_lengths
from reggeflow.curvature import (
    curvature_field,
    edge_ricci_curvature,
    edge_transverse_curvature,
    vertex_scalar_curvature,
)
from reggeflow.dual_volumes import edge_dual_volumes, edge_pair_table, \
    vertex_dual_volumes
from reggeflow.simplex_geometry import deficit_angles


@pytest.mark.parametrize("kind", ["cubic", "skew"])
@pytest.mark.parametrize("c", [1.0, 1 / 3])
def test_flat_curvatures_vanish(kind, c):
    tri = build_torus(kind, (3, 3, 3))
    field = curvature_field(tri, flat_lengths(tri, c))
    assert np.abs(field.deficit).max() < 1e-12
    assert np.abs(field.vertex_scalar).max() < 1e-11
    assert np.abs(field.edge_transverse).max() < 1e-11
    assert np.abs(field.edge_ricci).max() < 1e-11


def _perturbed(tri, seed, size=1e-4):
    rng = np.random.default_rng(seed)
    return flat_lengths(tri) * (1 + size * rng.standard_normal(tri.n_edges))


def test_vertex_scalar_direct_sum(cubic333):
    lengths = _perturbed(cubic333, 1)
    eps = deficit_angles(cubic333, lengths)
    vols = vertex_dual_volumes(cubic333, lengths)
    R = vertex_scalar_curvature(cubic333, lengths)
    for v in range(0, cubic333.n_vertices, 4):
        total = sum(lengths[e] * eps[e] for e in cubic333.vertex_edges[v])
        assert R[v] == pytest.approx(total / vols[v], rel=1e-12)


def test_edge_transverse_direct_sum(skew333):
    lengths = _perturbed(skew333, 2)
    eps = deficit_angles(skew333, lengths)
    vols = edge_dual_volumes(skew333, lengths)
    table = edge_pair_table(skew333, lengths)
    K = edge_transverse_curvature(skew333, lengths)
    for e in range(0, skew333.n_edges, 23):
        cross = 0.0
        for j in range(table.neighbor.shape[1]):
            if table.include[e, j]:
                p = table.neighbor[e, j]
                cross += 0.5 * lengths[p] * table.cos_ray[e, j] ** 2 * eps[p]
        expected = (lengths[e] * eps[e] + cross) / vols[e]
        assert K[e] == pytest.approx(expected, rel=1e-12)


def test_ricci_combination(cubic333):
    lengths = _perturbed(cubic333, 3)
    R = vertex_scalar_curvature(cubic333, lengths)
    K = edge_transverse_curvature(cubic333, lengths)
    Rc = edge_ricci_curvature(cubic333, lengths)
    v1 = cubic333.edges[:, 0]
    v2 = cubic333.edges[:, 1]
    np.testing.assert_allclose(Rc, 0.25 * (R[v1] + R[v2]) - K, rtol=1e-12)


def test_curvature_is_local():
    # a single perturbed face diagonal cannot influence edges far away
    tri = build_torus("cubic", (5, 5, 5))
    lengths = flat_lengths(tri)
    perturbed = lengths.copy()
    edge = 5 * tri.n_blocks + tri.block_index((0, 0, 0))  # xy diagonal
    perturbed[edge] += 1e-6
    base = curvature_field(tri, lengths)
    field = curvature_field(tri, perturbed)
    far_block = tri.block_index((2, 2, 2))
    far_edges = [r * tri.n_blocks + far_block for r in range(7)]
    # bit-for-bit untouched: the far edges see identical input data
    assert (field.edge_ricci[far_edges] == base.edge_ricci[far_edges]).all()
    assert np.abs(field.edge_ricci).max() > 1e-8  # but something moved


def test_field_export_round_trip(cubic333, tmp_path):
    lengths = _perturbed(cubic333, 5)
    field = curvature_field(cubic333, lengths)
    doc = field.to_json()
    assert set(doc) >= {"lengths", "deficit", "vertex_scalar",
                        "edge_transverse", "edge_ricci"}
    path = tmp_path / "field.json"
    field.save_json(path)
    loaded = json.loads(path.read_text())
    np.testing.assert_allclose(loaded["edge_ricci"], field.edge_ricci,
                               rtol=0, atol=0)
    csv_path = tmp_path / "field.csv"
    field.save_csv(csv_path)
    header = csv_path.read_text().splitlines()[0]
    assert "edge" in header and "ricci" in header
