# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Empirical orthogonal function reduction of gridded fields.

Rows of a field matrix are samples (years) and columns are grid points. The
basis is computed from the eigendecomposition of the centered ``n x n``
sample Gram matrix, which stays small because samples are few.

* `fit` - Mean field, orthonormal spatial components and singular values.
* `project` - Component coefficients of fields.
* `reconstruct` - Fields from component coefficients.
"""

import logging
import math

import numpy

from .numerics import DimensionMismatch, as_matrix, sym_eigen

logger = logging.getLogger('kremu.reduce')

DEFAULT_K = 5

# singular values below this fraction of the largest are treated as zero
_RANK_RTOL = 1e-8


class KTooLarge(ValueError):
    """More components requested than the data supports."""


class EmptyInput(ValueError):
    """No samples or no grid points."""


class EofBasis(object):
    """Truncated EOF basis.

    Attributes:
        mean_field ((*p*,) `numpy.ndarray`): Column means of the fitted fields.
        components ((*k*, *p*) `numpy.ndarray`): Orthonormal spatial patterns.
        singular_values ((*k*,) `numpy.ndarray`): Descending, ``>= 0``.
        total_variance (float): Squared Frobenius norm of the centered fields.
    """

    def __init__(self, mean_field, components, singular_values,
                 total_variance):
        self.mean_field = mean_field
        self.components = components
        self.singular_values = singular_values
        self.total_variance = total_variance

    @property
    def k(self):
        """int: Number of components."""
        return self.components.shape[0]

    @property
    def n_points(self):
        """int: Number of grid points."""
        return self.components.shape[1]

    @property
    def explained_variance_ratio(self):
        """(*k*,) `numpy.ndarray`: Fraction of the total variance per
        component."""
        if self.total_variance <= 0:
            return numpy.zeros(self.k)
        return self.singular_values**2 / self.total_variance


def _orthonormalize(rows):
    """Modified Gram-Schmidt on the rows, applied twice."""
    rows = rows.copy()
    for _ in range(2):
        for i in range(rows.shape[0]):
            for j in range(i):
                rows[i] -= numpy.dot(rows[j], rows[i]) * rows[j]
            rows[i] /= math.sqrt(numpy.dot(rows[i], rows[i]))
    return rows


def _complete(rows, k, p):
    """Extend orthonormal *rows* to *k* rows with projected unit vectors."""
    rows = list(rows)
    for m in range(p):
        if len(rows) == k:
            break
        v = numpy.zeros(p)
        v[m] = 1.0
        for _ in range(2):
            for row in rows:
                v -= numpy.dot(row, v) * row
        norm = math.sqrt(numpy.dot(v, v))
        if norm > 1e-6:
            rows.append(v / norm)
    return numpy.array(rows).reshape(k, p)


def fit(fields, k=DEFAULT_K):
    """Fit an EOF basis.

    Components whose singular value is numerically zero (at least one, as the
    fields are centered) are replaced by an orthonormal completion, so the
    basis always has *k* orthonormal rows. Each component is oriented so that
    its entry of largest magnitude is positive, the lowest index winning ties.

    Args:
        fields ((*n*, *p*) array_like): One field per row.
        k (int): Number of components, ``1 <= k <= min(n, p)``.

    Returns:
        `EofBasis`: The basis.

    Raises:
        EmptyInput: *fields* has no rows or no columns.
        KTooLarge: *k* exceeds ``min(n, p)``.
    """
    fields = as_matrix(fields, 'fields')
    n, p = fields.shape
    if n == 0 or p == 0:
        raise EmptyInput('cannot fit an EOF basis on shape '
                         + str(fields.shape))
    k = int(k)
    if k < 1:
        raise ValueError('k must be >= 1, got ' + str(k))
    if k > min(n, p):
        raise KTooLarge('k=' + str(k) + ' exceeds min(n_samples, n_points)='
                        + str(min(n, p)))

    mean_field = numpy.mean(fields, axis=0)
    centered = fields - mean_field
    gram = centered @ centered.T
    gram = 0.5 * (gram + gram.T)
    values, vectors = sym_eigen(gram)
    singular = numpy.sqrt(numpy.maximum(values, 0.0))

    s_max = singular[0] if singular.size else 0.0
    rank = int(numpy.sum(singular > _RANK_RTOL * s_max)) if s_max > 0 else 0
    kept = min(k, rank)

    rows = (centered.T @ vectors[:, :kept] / singular[:kept]).T
    if kept:
        rows = _orthonormalize(rows)
    if kept < k:
        logger.debug('completing ' + str(k - kept)
                     + ' EOF components with zero singular value')
        rows = _complete(rows, k, p)

    for row in rows:
        pivot = int(numpy.argmax(numpy.abs(row)))
        if row[pivot] < 0:
            row *= -1.0

    singular_values = numpy.concatenate(
        [singular[:kept], numpy.zeros(k - kept)])
    total = float(numpy.sum(centered * centered))
    basis = EofBasis(mean_field=mean_field,
                     components=numpy.ascontiguousarray(rows),
                     singular_values=singular_values,
                     total_variance=total)
    logger.debug('EOF basis k=' + str(k) + ' explains '
                 + str(float(numpy.sum(basis.explained_variance_ratio)))
                 + ' of the variance')
    return basis


def project(b, fields):
    """Return the coefficients ``(fields - mean_field) components^T``.

    Args:
        b (`EofBasis`): Basis.
        fields ((*n*, *p*) array_like): Fields, one per row.

    Returns:
        (*n*, *k*) `numpy.ndarray`: Coefficients.

    Raises:
        DimensionMismatch: *fields* has a different number of grid points.
    """
    fields = as_matrix(numpy.atleast_2d(fields), 'fields')
    if fields.shape[1] != b.n_points:
        raise DimensionMismatch('fields have ' + str(fields.shape[1])
                                + ' points, basis has ' + str(b.n_points))
    return (fields - b.mean_field) @ b.components.T


def reconstruct(b, coeffs):
    """Return the fields ``coeffs components + mean_field``.

    Args:
        b (`EofBasis`): Basis.
        coeffs ((*n*, *k*) array_like): Coefficients.

    Returns:
        (*n*, *p*) `numpy.ndarray`: Fields.

    Raises:
        DimensionMismatch: *coeffs* does not have *k* columns.
    """
    coeffs = as_matrix(numpy.atleast_2d(coeffs), 'coeffs')
    if coeffs.shape[1] != b.k:
        raise DimensionMismatch('coefficients have ' + str(coeffs.shape[1])
                                + ' columns, basis has k=' + str(b.k))
    return coeffs @ b.components + b.mean_field
