# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Dense linear algebra for the regressors and the EOF reduction.

:py:mod:`kremu.numerics` factors and solves the symmetric systems that appear
in kernel regression and decomposes the sample Gram matrices used by
:py:mod:`kremu.reduce`.

* `cholesky` - Factor a symmetric matrix, adding diagonal jitter if needed.
* `solve_cholesky` - Solve a system with a `CholeskyFactor`.
* `solve_lower` / `solve_upper` - Triangular substitution.
* `sym_eigen` - Symmetric eigendecomposition by cyclic Jacobi rotations.

Matrices and vectors are C-contiguous `numpy.ndarray` objects of
``numpy.float64``. `as_matrix` and `as_vector` convert array_like input and
reject non-finite entries.
"""

import logging
import math
from collections import namedtuple

import numpy

logger = logging.getLogger('kremu.numerics')


class DimensionMismatch(ValueError):
    """Operand shapes are incompatible."""


class NotSymmetric(ValueError):
    """A matrix that must be symmetric is not."""


class NumericalError(RuntimeError):
    """Base class of numerical failures in the solvers."""


class NotPositiveDefinite(NumericalError):
    """Cholesky factorization failed even with the largest allowed jitter."""


class NoConvergence(NumericalError):
    """An iterative method did not reach its tolerance."""


def as_matrix(a, name='matrix'):
    """Convert *a* to a finite 2-D ``float64`` array.

    Args:
        a (array_like): Input data.
        name (str): Name used in error messages.

    Returns:
        `numpy.ndarray`: C-contiguous array with ``ndim == 2``.
    """
    m = numpy.ascontiguousarray(a, dtype=numpy.float64)
    if m.ndim != 2:
        raise DimensionMismatch(name + ' must be 2-dimensional, got shape '
                                + str(m.shape))
    if not numpy.all(numpy.isfinite(m)):
        raise ValueError(name + ' contains NaN or Inf')
    return m


def as_vector(b, name='vector'):
    """Convert *b* to a finite 1-D ``float64`` array.

    Args:
        b (array_like): Input data.
        name (str): Name used in error messages.

    Returns:
        `numpy.ndarray`: C-contiguous array with ``ndim == 1``.
    """
    v = numpy.ascontiguousarray(b, dtype=numpy.float64)
    if v.ndim != 1:
        raise DimensionMismatch(name + ' must be 1-dimensional, got shape '
                                + str(v.shape))
    if not numpy.all(numpy.isfinite(v)):
        raise ValueError(name + ' contains NaN or Inf')
    return v


class JitterPolicy(namedtuple('JitterPolicy', 'start factor cap')):
    """Diagonal jitter ladder for `cholesky`.

    Attributes:
        start (float): First jitter, relative to the mean diagonal entry.
        factor (float): Growth factor between attempts.
        cap (float): Largest jitter, relative to the mean diagonal entry.
    """

    __slots__ = ()

    def ladder(self, mean_diag):
        """Absolute jitter values to try, smallest first."""
        scale = mean_diag if mean_diag > 0 else 1.0
        values = []
        rel = self.start
        while rel <= self.cap * (1 + 1e-9):
            values.append(rel * scale)
            rel *= self.factor
        return values


DEFAULT_JITTER = JitterPolicy(start=1e-10, factor=10.0, cap=1e-4)

CholeskyFactor = namedtuple('CholeskyFactor', 'l jitter_applied')
CholeskyFactor.__doc__ = """Lower triangular factor of a symmetric matrix.

Attributes:
    l ((*n*, *n*) `numpy.ndarray`): Lower triangular factor with a positive
        diagonal.
    jitter_applied (float): Value added to the diagonal before factoring.
"""


def check_symmetric(a, rtol=1e-12):
    """Raise `NotSymmetric` unless *a* is square and symmetric within *rtol*.

    The tolerance is relative to the largest absolute entry.
    """
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch('matrix must be square, got shape '
                                + str(a.shape))
    scale = numpy.max(numpy.abs(a)) if a.size else 0.0
    if numpy.max(numpy.abs(a - a.T), initial=0.0) > rtol * scale:
        raise NotSymmetric('matrix is not symmetric')


def _factor(a):
    """Return the Cholesky factor of *a*, None if a pivot is not positive."""
    n = a.shape[0]
    l = numpy.zeros_like(a)
    for j in range(n):
        row = l[j, :j]
        pivot = a[j, j] - numpy.dot(row, row)
        if not pivot > 0.0:
            return None
        l[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            l[j + 1:, j] = (a[j + 1:, j] - l[j + 1:, :j] @ row) / l[j, j]
    return l


def cholesky(a, jitter_policy=DEFAULT_JITTER):
    """Factor a symmetric positive (semi-)definite matrix.

    Args:
        a ((*n*, *n*) array_like): Symmetric matrix.
        jitter_policy (`JitterPolicy`): Jitter ladder tried when the plain
            factorization fails.

    Returns:
        `CholeskyFactor`: ``l`` with ``l @ l.T == a + jitter_applied * I``.
        ``jitter_applied`` is 0 when *a* is positive definite.

    Raises:
        NotSymmetric: *a* is not symmetric.
        NotPositiveDefinite: No jitter on the ladder makes *a* factorable.
    """
    a = as_matrix(a)
    check_symmetric(a)

    l = _factor(a)
    if l is not None:
        return CholeskyFactor(l=l, jitter_applied=0.0)

    n = a.shape[0]
    mean_diag = float(numpy.mean(numpy.diag(a)))
    for jitter in jitter_policy.ladder(mean_diag):
        logger.debug('retrying Cholesky with jitter ' + str(jitter))
        l = _factor(a + jitter * numpy.eye(n))
        if l is not None:
            logger.warning('Cholesky needed jitter ' + str(jitter)
                           + ' on a ' + str(n) + 'x' + str(n) + ' matrix')
            return CholeskyFactor(l=l, jitter_applied=jitter)

    raise NotPositiveDefinite('matrix is not positive definite (largest '
                              'jitter ' + str(jitter_policy.cap)
                              + ' x mean diagonal failed)')


def solve_lower(l, b):
    """Solve ``l x = b`` by forward substitution.

    Args:
        l ((*n*, *n*) `numpy.ndarray`): Lower triangular matrix.
        b ((*n*,) or (*n*, *m*) array_like): Right hand side(s).

    Returns:
        `numpy.ndarray`: Solution with the shape of *b*.
    """
    b = numpy.asarray(b, dtype=numpy.float64)
    n = l.shape[0]
    if b.shape[0] != n:
        raise DimensionMismatch('right hand side has ' + str(b.shape[0])
                                + ' rows, expected ' + str(n))
    x = numpy.array(b, dtype=numpy.float64)
    for i in range(n):
        x[i] = (b[i] - l[i, :i] @ x[:i]) / l[i, i]
    return x


def solve_upper(u, b):
    """Solve ``u x = b`` by back substitution.

    Args:
        u ((*n*, *n*) `numpy.ndarray`): Upper triangular matrix.
        b ((*n*,) or (*n*, *m*) array_like): Right hand side(s).

    Returns:
        `numpy.ndarray`: Solution with the shape of *b*.
    """
    b = numpy.asarray(b, dtype=numpy.float64)
    n = u.shape[0]
    if b.shape[0] != n:
        raise DimensionMismatch('right hand side has ' + str(b.shape[0])
                                + ' rows, expected ' + str(n))
    x = numpy.array(b, dtype=numpy.float64)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - u[i, i + 1:] @ x[i + 1:]) / u[i, i]
    return x


def solve_cholesky(f, b):
    """Solve ``(l lᵀ) x = b`` given a `CholeskyFactor`.

    Args:
        f (`CholeskyFactor`): Factor from `cholesky`.
        b ((*n*,) or (*n*, *m*) array_like): Right hand side(s).

    Returns:
        `numpy.ndarray`: Solution with the shape of *b*.

    Raises:
        DimensionMismatch: *b* does not have *n* rows.
    """
    return solve_upper(f.l.T, solve_lower(f.l, b))


def _round_robin(n):
    """Split all index pairs of range(n) into rounds of disjoint pairs.

    Returns:
        list[tuple]: ``(p, q)`` index arrays per round with ``p < q``.
    """
    players = list(range(n))
    if n % 2:
        players.append(-1)
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for k in range(m // 2):
            i, j = players[k], players[m - 1 - k]
            if i >= 0 and j >= 0:
                p.append(min(i, j))
                q.append(max(i, j))
        rounds.append((numpy.array(p, dtype=numpy.intp),
                       numpy.array(q, dtype=numpy.intp)))
        # keep the first player fixed and rotate the rest
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_diagonal_norm(a):
    off = a.copy()
    numpy.fill_diagonal(off, 0.0)
    return math.sqrt(numpy.sum(off * off))


def _rotate(a, v, p, q):
    """Apply the Jacobi rotations of the disjoint pairs (p, q) in place."""
    apq = a[p, q]
    active = apq != 0.0
    if not numpy.any(active):
        return
    safe = numpy.where(active, apq, 1.0)
    theta = (a[q, q] - a[p, p]) / (2.0 * safe)
    sign = numpy.where(theta >= 0.0, 1.0, -1.0)
    t = numpy.where(active,
                    sign / (numpy.abs(theta) + numpy.hypot(theta, 1.0)), 0.0)
    c = 1.0 / numpy.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c[:, None] * row_p - s[:, None] * row_q
    a[q, :] = s[:, None] * row_p + c[:, None] * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def sym_eigen(a, tol=1e-12, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix.

    Cyclic Jacobi method. Each sweep visits every off-diagonal pair once,
    grouped into rounds of disjoint pairs that are rotated together. Sweeps
    stop once the off-diagonal Frobenius norm is at most
    ``tol * ||a||_F``.

    Args:
        a ((*n*, *n*) array_like): Symmetric matrix.
        tol (float): Relative off-diagonal tolerance.
        max_sweeps (int): Sweep limit.

    Returns:
        tuple(`numpy.ndarray`, `numpy.ndarray`): ``(values, vectors)`` with
        values sorted in descending order and the matching orthonormal
        eigenvectors in the columns of ``vectors``.

    Raises:
        NotSymmetric: *a* is not symmetric.
        NoConvergence: The tolerance was not met after *max_sweeps* sweeps.
    """
    a = as_matrix(a)
    check_symmetric(a)
    n = a.shape[0]

    work = 0.5 * (a + a.T)
    v = numpy.eye(n)
    threshold = tol * math.sqrt(numpy.sum(a * a))
    rounds = _round_robin(n)

    sweeps = 0
    off = _off_diagonal_norm(work)
    while off > threshold:
        if sweeps == max_sweeps:
            raise NoConvergence('Jacobi eigensolver did not converge in '
                                + str(max_sweeps) + ' sweeps (off-diagonal '
                                'norm ' + str(off) + ')')
        for p, q in rounds:
            _rotate(work, v, p, q)
        sweeps += 1
        off = _off_diagonal_norm(work)

    logger.debug('Jacobi converged after ' + str(sweeps) + ' sweeps, n='
                 + str(n))

    values = numpy.diag(work).copy()
    order = numpy.argsort(-values, kind='stable')
    return values[order], numpy.ascontiguousarray(v[:, order])
