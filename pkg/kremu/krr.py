# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Kernel ridge regression.

The model is ``f(x) = sum_i alpha_i k(x_i, x) + b`` with ``b`` the training
target mean and ``alpha = (K + lam * I)^-1 (y - b)``. The regularizer is
``lam * I`` without scaling by the sample count, so a fit with ``lam`` equals
the posterior mean of a Gaussian process with noise variance ``lam``.

`cv_select` chooses the kernel and ``lam`` by k-fold cross-validation over a
`CvGrid`.
"""

import logging
import math

import numpy

from . import kernels
from .gpr import EmptyGrid, _check_training_set
from .kernels import InvalidHyperparameter
from .numerics import (DEFAULT_JITTER, DimensionMismatch, as_matrix, cholesky,
                       solve_cholesky)

logger = logging.getLogger('kremu.krr')

DEFAULT_LAMBDAS = (1e-6, 1e-4, 1e-2, 1.0, 1e2)
DEFAULT_LENGTHSCALES = (0.5, 1.0, 2.0, 5.0)
DEFAULT_FOLDS = 5


class TooFewSamples(ValueError):
    """Fewer samples than cross-validation folds."""


class KrrModel(object):
    """Fitted kernel ridge regressor.

    Attributes:
        x_train ((*n*, *d*) `numpy.ndarray`): Training inputs.
        alpha ((*n*,) `numpy.ndarray`): Dual coefficients.
        bias (float): Training target mean (0 when fitted with
            ``center=False``).
        kernel (`kremu.kernels.Kernel`): Kernel.
        lam (float): Ridge parameter.
    """

    def __init__(self, x_train, alpha, bias, kernel, lam):
        self.x_train = x_train
        self.alpha = alpha
        self.bias = bias
        self.kernel = kernel
        self.lam = lam

    def __repr__(self):
        return ('KrrModel(kernel=' + repr(kernels.print_kernel(self.kernel))
                + ', lam=' + repr(self.lam) + ', n_train='
                + str(self.x_train.shape[0]) + ')')


class CvGrid(object):
    """Cross-validation grid.

    Args:
        lambdas (list[float]): Ridge parameters, each ``> 0``.
        kernel_candidates (list[`kremu.kernels.Kernel`]): Kernels.
        folds (int): Number of folds, ``>= 2``.
    """

    def __init__(self, lambdas, kernel_candidates, folds=DEFAULT_FOLDS):
        self.lambdas = [float(lam) for lam in lambdas]
        self.kernel_candidates = list(kernel_candidates)
        self.folds = int(folds)

        if not self.lambdas:
            raise EmptyGrid('lambda grid is empty')
        if not self.kernel_candidates:
            raise EmptyGrid('kernel grid is empty')
        for lam in self.lambdas:
            _check_lambda(lam)
        if self.folds < 2:
            raise InvalidHyperparameter('folds must be >= 2, got '
                                        + str(self.folds))


def default_grid(folds=DEFAULT_FOLDS):
    """`CvGrid` over matern32 and rbf kernels and `DEFAULT_LAMBDAS`."""
    candidates = [
        cls(ls=ls) for cls in (kernels.Matern32, kernels.RBF)
        for ls in DEFAULT_LENGTHSCALES
    ]
    return CvGrid(DEFAULT_LAMBDAS, candidates, folds)


def _check_lambda(lam):
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0):
        raise InvalidHyperparameter('lambda must be > 0, got ' + repr(lam))
    return lam


def fit(x, y, kernel, lam, center=True, jitter_policy=DEFAULT_JITTER):
    """Fit a kernel ridge regressor.

    Args:
        x ((*n*, *d*) array_like): Training inputs.
        y ((*n*,) array_like): Training targets.
        kernel (`kremu.kernels.Kernel`): Kernel.
        lam (float): Ridge parameter, ``> 0``.
        center (bool): Use the target mean as bias.
        jitter_policy (`kremu.numerics.JitterPolicy`): Jitter ladder.

    Returns:
        `KrrModel`: The fitted model.

    Raises:
        EmptyTrainingSet: *x* has no rows.
        InvalidHyperparameter: *lam* is not positive.
        NotPositiveDefinite: The jitter ladder is exhausted.
    """
    x, y = _check_training_set(x, y)
    lam = _check_lambda(lam)

    bias = float(numpy.mean(y)) if center else 0.0
    k = kernels.kernel_matrix(kernel, x).m
    k[numpy.diag_indices_from(k)] += lam
    alpha = solve_cholesky(cholesky(k, jitter_policy), y - bias)
    return KrrModel(x_train=x, alpha=alpha, bias=bias, kernel=kernel, lam=lam)


def predict(m, xq):
    """Evaluate ``f(xq) = sum_i alpha_i k(x_i, xq) + bias``.

    Raises:
        DimensionMismatch: Column count differs from the training inputs.
    """
    xq = as_matrix(xq, 'xq')
    if xq.shape[1] != m.x_train.shape[1]:
        raise DimensionMismatch('query has ' + str(xq.shape[1])
                                + ' columns, model was trained on '
                                + str(m.x_train.shape[1]))
    return kernels.kernel_matrix(m.kernel, xq, m.x_train).m @ m.alpha + m.bias


def make_folds(n, folds, seed):
    """Shuffle ``range(n)`` with *seed* and split it into contiguous folds."""
    order = numpy.random.default_rng(seed).permutation(n)
    return numpy.array_split(order, folds)


def cv_select(x, y, grid, seed=0, center=True):
    """Select kernel and ridge parameter by k-fold cross-validation.

    Candidates are visited kernel by kernel, lambdas in the inner loop. The
    first candidate with the smallest mean validation RMSE wins and is refit
    on all samples.

    Args:
        x ((*n*, *d*) array_like): Training inputs.
        y ((*n*,) array_like): Training targets.
        grid (`CvGrid`): Candidates and fold count.
        seed (int): Seed of the fold shuffle.
        center (bool): Use the target mean as bias.

    Returns:
        tuple(`KrrModel`, list): The refit winner and the table of
        ``(kernel, lam, rmse)`` rows in visiting order.

    Raises:
        TooFewSamples: There are fewer samples than folds.
    """
    x, y = _check_training_set(x, y)
    n = x.shape[0]
    if grid.folds > n:
        raise TooFewSamples(str(grid.folds) + ' folds need at least '
                            + str(grid.folds) + ' samples, got ' + str(n))

    folds = make_folds(n, grid.folds, seed)
    table = []
    best = None
    for kernel in grid.kernel_candidates:
        for lam in grid.lambdas:
            errors = []
            for held_out in folds:
                train = numpy.ones(n, dtype=bool)
                train[held_out] = False
                model = fit(x[train], y[train], kernel, lam, center)
                residual = predict(model, x[held_out]) - y[held_out]
                errors.append(math.sqrt(float(numpy.mean(residual**2))))
            rmse = float(numpy.mean(errors))
            logger.debug(kernels.print_kernel(kernel) + ' lam=' + str(lam)
                         + ' cv rmse=' + str(rmse))
            table.append((kernel, lam, rmse))
            if best is None or rmse < best[2]:
                best = (kernel, lam, rmse)

    logger.info('cross-validation selected ' + kernels.print_kernel(best[0])
                + ' lam=' + str(best[1]) + ' (rmse ' + str(best[2]) + ')')
    return fit(x, y, best[0], best[1], center), table
