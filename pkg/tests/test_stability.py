import numpy as np
import pytest

from reggeflow import build_torus, flat_lengths
from reggeflow import reference
from reggeflow.stability import (
    NotStationaryError,
    build_coefficient_matrix,
    distinct_real_parts,
    reduced_matrix,
    rotate_stencil,
    row_sum_eigenpair,
    spectrum,
    stencil_row,
)


@pytest.fixture(scope="module")
def cubic_raw(cubic333):
    return build_coefficient_matrix(cubic333, mode="raw")


@pytest.fixture(scope="module")
def cubic_flattened(cubic333):
    return build_coefficient_matrix(cubic333, mode="flattened")


@pytest.fixture(scope="module")
def skew_raw(skew333):
    return build_coefficient_matrix(skew333, mode="raw")


def test_matrix_shape_and_reality(cubic333, cubic_raw):
    n = cubic333.n_blocks
    assert cubic_raw.shape == (3 * n, 3 * n)
    assert np.isrealobj(cubic_raw)


def test_non_flat_lengths_are_rejected(cubic333):
    lengths = flat_lengths(cubic333).copy()
    lengths[0] += 1e-3
    with pytest.raises(NotStationaryError):
        build_coefficient_matrix(cubic333, lengths=lengths)


def test_cubic_raw_spectrum(cubic_raw):
    expected = reference.RAW_SPECTRA[("cubic", (3, 3, 3), 1.0)]
    got = distinct_real_parts(spectrum(cubic_raw), count=len(expected),
                              decimals=3)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-3)


def test_cubic_raw_row_sums(cubic_raw):
    pair = row_sum_eigenpair(cubic_raw, tol=1e-6)
    assert pair is not None
    value, vector = pair
    assert value == pytest.approx(12.0, abs=1e-3)
    assert (vector == 1.0).all()


def test_cubic_flattened_rows_sum_to_zero(cubic_flattened):
    pair = row_sum_eigenpair(cubic_flattened, tol=1e-6)
    assert pair is not None
    assert pair[0] == pytest.approx(0.0, abs=1e-6)


def test_cubic_flattened_spectrum_is_stable(cubic_flattened):
    assert spectrum(cubic_flattened).real.max() <= 1e-8


def test_skew_raw_spectrum(skew_raw):
    expected = reference.RAW_SPECTRA[("skew", (3, 3, 3), 1.0)]
    got = distinct_real_parts(spectrum(skew_raw), count=len(expected),
                              decimals=3)
    np.testing.assert_allclose(got, expected, rtol=0, atol=2e-3)


def test_skew_reduced_matrix(skew333, skew_raw):
    M = reduced_matrix(skew333, skew_raw)
    np.testing.assert_allclose(M, reference.SKEW_REDUCED_MATRIX,
                               rtol=0, atol=2e-3)
    w, v = np.linalg.eig(M)
    lead = np.argmax(w.real)
    assert w[lead].real == pytest.approx(
        reference.SKEW_DOMINANT_EIGENVALUE, abs=2e-3)
    vec = np.abs(v[:, lead].real)
    vec /= np.linalg.norm(vec)
    np.testing.assert_allclose(vec, reference.SKEW_DOMINANT_EIGENVECTOR,
                               rtol=0, atol=2e-3)


def test_reduced_matrix_rejects_wrong_shape(cubic333):
    with pytest.raises(ValueError):
        reduced_matrix(cubic333, np.eye(5))


def test_cubic_stencil_row(cubic333, cubic_raw):
    entries = stencil_row(cubic333, cubic_raw, kind="xy", block=0, tol=1e-3)
    expected = reference.RAW_CUBIC_STENCIL
    assert set(entries) == set(expected)
    for key, value in expected.items():
        assert entries[key] == pytest.approx(value, abs=1e-6)


def test_rotated_rows_match_other_kinds(cubic333, cubic_raw):
    base = stencil_row(cubic333, cubic_raw, kind="xy", block=0, tol=1e-3)
    for times, kind in ((1, "yz"), (2, "zx")):
        expected = rotate_stencil(base, times)
        got = stencil_row(cubic333, cubic_raw, kind=kind, block=0, tol=1e-3)
        assert set(got) == set(expected)
        for key, value in expected.items():
            assert got[key] == pytest.approx(value, abs=1e-6)


def test_rotate_stencil_is_cyclic():
    entries = {("xy", (1, 2, 3)): 0.5, ("yz", (0, -1, 0)): -1.0}
    assert rotate_stencil(entries, 1) == {
        ("yz", (3, 1, 2)): 0.5, ("zx", (0, 0, -1)): -1.0}
    assert rotate_stencil(entries, 3) == entries
    assert rotate_stencil(entries, 0) == entries


def test_translation_invariance(cubic333, cubic_raw):
    base = stencil_row(cubic333, cubic_raw, kind="xy", block=0, tol=1e-3)
    other = stencil_row(cubic333, cubic_raw, kind="xy", block=13, tol=1e-3)
    assert set(other) == set(base)
    for key, value in base.items():
        assert other[key] == pytest.approx(value, abs=1e-6)


def test_distinct_real_parts_groups_by_rounding():
    w = np.array([3.0000001, 3.0, 1.5, 1.5, -2.0, 0.0])
    np.testing.assert_array_equal(
        distinct_real_parts(w, decimals=6), [3.0, 1.5, 0.0, -2.0])
    np.testing.assert_array_equal(
        distinct_real_parts(w, count=2, decimals=6), [3.0, 1.5])


def test_row_sum_eigenpair_rejects_uneven_rows():
    A = np.array([[1.0, 0.0], [0.0, 2.0]])
    assert row_sum_eigenpair(A, tol=1e-8) is None
