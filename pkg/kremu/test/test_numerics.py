# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Test kremu.numerics."""

import numpy
import pytest

from kremu import numerics
from kremu.numerics import (DEFAULT_JITTER, DimensionMismatch, JitterPolicy,
                            NoConvergence, NotPositiveDefinite, NotSymmetric)

from kremu.test.conftest import gauss_jordan_inverse, random_spd


def test_cholesky_reconstructs(rng):
    """Test that l lᵀ reproduces a positive definite matrix."""
    for n in (1, 2, 5, 12):
        a = random_spd(rng, n)
        f = numerics.cholesky(a)
        assert f.jitter_applied == 0.0
        numpy.testing.assert_allclose(f.l @ f.l.T, a, atol=1e-12)
        numpy.testing.assert_array_equal(f.l, numpy.tril(f.l))
        assert numpy.all(numpy.diag(f.l) > 0)


def test_cholesky_1x1():
    """Test the factor of a 1x1 matrix."""
    f = numerics.cholesky([[4.0]])
    numpy.testing.assert_array_equal(f.l, [[2.0]])


def test_solve_matches_inverse(rng):
    """Test solve_cholesky against an explicit inverse."""
    for _ in range(20):
        a = random_spd(rng, 5)
        b = rng.standard_normal(5)
        x = numerics.solve_cholesky(numerics.cholesky(a), b)
        numpy.testing.assert_allclose(x, gauss_jordan_inverse(a) @ b,
                                      atol=1e-8)


def test_solve_multiple_rhs(rng):
    """Test solving with a matrix of right hand sides."""
    a = random_spd(rng, 6)
    b = rng.standard_normal((6, 3))
    x = numerics.solve_cholesky(numerics.cholesky(a), b)
    assert x.shape == (6, 3)
    numpy.testing.assert_allclose(a @ x, b, atol=1e-10)


def test_triangular_solves(rng):
    """Test forward and back substitution."""
    l = numpy.tril(rng.uniform(0.5, 1.5, (4, 4)))
    b = rng.standard_normal(4)
    numpy.testing.assert_allclose(l @ numerics.solve_lower(l, b), b,
                                  atol=1e-12)
    numpy.testing.assert_allclose(l.T @ numerics.solve_upper(l.T, b), b,
                                  atol=1e-12)


def test_solve_dimension_mismatch(rng):
    """Test that a right hand side of the wrong length is rejected."""
    f = numerics.cholesky(random_spd(rng, 3))
    with pytest.raises(DimensionMismatch):
        numerics.solve_cholesky(f, numpy.ones(4))


def test_cholesky_jitter():
    """Test that a singular PSD matrix is factored with jitter."""
    v = numpy.array([1.0, 2.0, 3.0])
    a = numpy.outer(v, v)
    f = numerics.cholesky(a)
    assert 0.0 < f.jitter_applied <= DEFAULT_JITTER.cap * numpy.mean(
        numpy.diag(a))
    numpy.testing.assert_allclose(f.l @ f.l.T,
                                  a + f.jitter_applied * numpy.eye(3),
                                  atol=1e-12)


def test_cholesky_not_positive_definite():
    """Test that an indefinite matrix exhausts the jitter ladder."""
    with pytest.raises(NotPositiveDefinite):
        numerics.cholesky([[1.0, 2.0], [2.0, 1.0]])


def test_cholesky_not_symmetric():
    """Test that asymmetric input is rejected."""
    with pytest.raises(NotSymmetric):
        numerics.cholesky([[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(DimensionMismatch):
        numerics.cholesky(numpy.ones((2, 3)))


def test_non_finite_input():
    """Test that NaN input is rejected."""
    with pytest.raises(ValueError):
        numerics.cholesky([[numpy.nan]])


def test_jitter_ladder():
    """Test the jitter values of a policy."""
    policy = JitterPolicy(start=1e-6, factor=10.0, cap=1e-4)
    numpy.testing.assert_allclose(policy.ladder(2.0), [2e-6, 2e-5, 2e-4])
    assert policy.ladder(0.0) == pytest.approx([1e-6, 1e-5, 1e-4])


def test_sym_eigen_decomposes(rng):
    """Test V diag(λ) Vᵀ = A with orthonormal V and sorted values."""
    for n in (1, 2, 3, 7, 10):
        b = rng.standard_normal((n, n))
        a = 0.5 * (b + b.T)
        values, vectors = numerics.sym_eigen(a)
        numpy.testing.assert_allclose((vectors * values) @ vectors.T, a,
                                      atol=1e-10)
        numpy.testing.assert_allclose(vectors.T @ vectors, numpy.eye(n),
                                      atol=1e-10)
        assert numpy.all(numpy.diff(values) <= 0)
        expected = numpy.sort(numpy.linalg.eigvalsh(a))[::-1]
        numpy.testing.assert_allclose(values, expected, atol=1e-10)


def test_sym_eigen_diagonal():
    """Test that a diagonal matrix needs no rotation."""
    values, vectors = numerics.sym_eigen(numpy.diag([1.0, 3.0, 2.0]))
    numpy.testing.assert_array_equal(values, [3.0, 2.0, 1.0])
    numpy.testing.assert_array_equal(numpy.abs(vectors),
                                     numpy.eye(3)[:, [1, 2, 0]])


def test_sym_eigen_repeated_values():
    """Test a matrix with a repeated eigenvalue."""
    a = numpy.array([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
    values, vectors = numerics.sym_eigen(a)
    numpy.testing.assert_allclose(values, [3.0, 3.0, 1.0], atol=1e-12)
    numpy.testing.assert_allclose((vectors * values) @ vectors.T, a,
                                  atol=1e-12)


def test_sym_eigen_deterministic(rng):
    """Test that repeated runs are bit identical."""
    a = random_spd(rng, 6)
    first = numerics.sym_eigen(a)
    second = numerics.sym_eigen(a)
    numpy.testing.assert_array_equal(first[0], second[0])
    numpy.testing.assert_array_equal(first[1], second[1])


def test_sym_eigen_no_convergence(rng):
    """Test the sweep limit."""
    a = random_spd(rng, 8)
    with pytest.raises(NoConvergence):
        numerics.sym_eigen(a, tol=1e-14, max_sweeps=0)


def test_round_robin_covers_all_pairs():
    """Test that the rounds visit each pair once."""
    for n in (2, 5, 8):
        pairs = []
        for p, q in numerics._round_robin(n):
            assert len(set(p) | set(q)) == 2 * len(p)
            pairs.extend(zip(p.tolist(), q.tolist()))
        assert sorted(pairs) == [(i, j) for i in range(n)
                                 for j in range(i + 1, n)]
