# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Test kremu.reduce."""

import numpy
import pytest

from kremu import reduce
from kremu.numerics import DimensionMismatch


def test_components_orthonormal(rng):
    """Test orthonormal components and descending singular values."""
    fields = rng.standard_normal((12, 30))
    b = reduce.fit(fields, 6)
    assert b.components.shape == (6, 30)
    numpy.testing.assert_allclose(b.components @ b.components.T,
                                  numpy.eye(6), atol=1e-10)
    assert numpy.all(numpy.diff(b.singular_values) <= 0)
    numpy.testing.assert_allclose(b.mean_field, fields.mean(axis=0))


def test_singular_values_match_svd(rng):
    """Test singular values against a library SVD."""
    fields = rng.standard_normal((10, 8))
    b = reduce.fit(fields, 5)
    expected = numpy.linalg.svd(fields - fields.mean(axis=0),
                                compute_uv=False)[:5]
    numpy.testing.assert_allclose(b.singular_values, expected, atol=1e-9)


def test_full_rank_round_trip(rng):
    """Test that k = min(n, p) reconstructs the fields."""
    for n, p in ((6, 20), (20, 6), (5, 5)):
        fields = rng.standard_normal((n, p))
        b = reduce.fit(fields, min(n, p))
        back = reduce.reconstruct(b, reduce.project(b, fields))
        assert numpy.max(numpy.abs(back - fields)) <= 1e-8


def test_truncation_error(rng):
    """Test that the residual equals the discarded variance."""
    fields = rng.standard_normal((15, 25))
    full = reduce.fit(fields, 15)
    for k in (1, 3, 7):
        b = reduce.fit(fields, k)
        back = reduce.reconstruct(b, reduce.project(b, fields))
        error = float(numpy.sum((fields - back)**2))
        discarded = float(numpy.sum(full.singular_values[k:]**2))
        assert error == pytest.approx(discarded, abs=1e-6)


def test_explained_variance_ratio(rng):
    """Test that all components explain all variance."""
    fields = rng.standard_normal((8, 12))
    b = reduce.fit(fields, 8)
    assert numpy.sum(b.explained_variance_ratio) == pytest.approx(1.0)
    assert b.total_variance == pytest.approx(
        numpy.sum((fields - fields.mean(axis=0))**2))


def test_sign_convention(rng):
    """Test that the largest magnitude entry of each component is positive."""
    fields = rng.standard_normal((9, 14))
    b = reduce.fit(fields, 4)
    for row in b.components:
        assert row[numpy.argmax(numpy.abs(row))] > 0
    flipped = reduce.fit(-fields, 4)
    numpy.testing.assert_allclose(flipped.components, b.components,
                                  atol=1e-10)


def test_deterministic(rng):
    """Test bit identical repeated fits."""
    fields = rng.standard_normal((7, 10))
    first = reduce.fit(fields, 3)
    second = reduce.fit(fields, 3)
    numpy.testing.assert_array_equal(first.components, second.components)
    numpy.testing.assert_array_equal(first.singular_values,
                                     second.singular_values)


def test_constant_fields():
    """Test that identical fields still give an orthonormal basis."""
    fields = numpy.tile(numpy.arange(5.0), (4, 1))
    b = reduce.fit(fields, 3)
    numpy.testing.assert_array_equal(b.singular_values, numpy.zeros(3))
    numpy.testing.assert_allclose(b.components @ b.components.T,
                                  numpy.eye(3), atol=1e-12)
    numpy.testing.assert_allclose(reduce.project(b, fields), 0.0, atol=1e-12)
    numpy.testing.assert_array_equal(b.explained_variance_ratio,
                                     numpy.zeros(3))


def test_single_vector_arguments(rng):
    """Test that one field or one coefficient row is accepted."""
    fields = rng.standard_normal((5, 6))
    b = reduce.fit(fields, 2)
    assert reduce.project(b, fields[0]).shape == (1, 2)
    assert reduce.reconstruct(b, [0.0, 0.0]).shape == (1, 6)
    numpy.testing.assert_allclose(reduce.reconstruct(b, [0.0, 0.0])[0],
                                  b.mean_field)


def test_errors(rng):
    """Test invalid arguments."""
    fields = rng.standard_normal((4, 6))
    with pytest.raises(reduce.KTooLarge):
        reduce.fit(fields, 5)
    with pytest.raises(reduce.EmptyInput):
        reduce.fit(numpy.zeros((0, 6)), 1)
    with pytest.raises(ValueError):
        reduce.fit(fields, 0)
    b = reduce.fit(fields, 2)
    with pytest.raises(DimensionMismatch):
        reduce.project(b, numpy.zeros((1, 5)))
    with pytest.raises(DimensionMismatch):
        reduce.reconstruct(b, numpy.zeros((1, 3)))
