# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Exact Gaussian process regression.

A zero-mean Gaussian process prior with covariance ``k`` and independent
Gaussian noise of variance ``noise_variance`` is conditioned on the training
targets. The scalar training mean is removed before the fit and added back to
predictions; pass ``center=False`` to use a strictly zero prior mean.

* `fit` - Factor ``K + noise_variance * I`` and solve for the weights.
* `predict` - Posterior mean and per-point variance.
* `log_marginal_likelihood` - Evidence of the training targets.
* `grid_select` - Exhaustive hyperparameter search maximizing the evidence.
* `confidence_interval` - Symmetric interval around the posterior mean.
"""

import itertools
import logging
import math
from collections import namedtuple

import numpy

from . import kernels
from .numerics import (DEFAULT_JITTER, DimensionMismatch, NotPositiveDefinite,
                       as_matrix, as_vector, cholesky, solve_cholesky,
                       solve_lower)

logger = logging.getLogger('kremu.gpr')


class EmptyTrainingSet(ValueError):
    """A regressor was fitted on zero samples."""


class EmptyGrid(ValueError):
    """A hyperparameter grid has no entries."""


Posterior = namedtuple('Posterior', 'mean variance')
Posterior.__doc__ = """Posterior marginals at a set of query points.

Attributes:
    mean ((*q*,) `numpy.ndarray`): Posterior mean.
    variance ((*q*,) `numpy.ndarray`): Posterior variance, clamped at 0.
"""


class GprModel(object):
    """Fitted Gaussian process regressor.

    Attributes:
        x_train ((*n*, *d*) `numpy.ndarray`): Training inputs.
        alpha ((*n*,) `numpy.ndarray`): Weights
            ``(K + noise_variance * I)^-1 (y - y_mean)``.
        factor (`kremu.numerics.CholeskyFactor`): Factor of
            ``K + noise_variance * I``.
        kernel (`kremu.kernels.Kernel`): Covariance function.
        noise_variance (float): Observation noise variance.
        y_mean (float): Mean removed from the targets (0 when fitted with
            ``center=False``).
    """

    def __init__(self, x_train, alpha, factor, kernel, noise_variance,
                 y_mean):
        self.x_train = x_train
        self.alpha = alpha
        self.factor = factor
        self.kernel = kernel
        self.noise_variance = noise_variance
        self.y_mean = y_mean

    @property
    def n_train(self):
        """int: Number of training samples."""
        return self.x_train.shape[0]

    def __repr__(self):
        return ('GprModel(kernel=' + repr(kernels.print_kernel(self.kernel))
                + ', noise_variance=' + repr(self.noise_variance)
                + ', n_train=' + str(self.n_train) + ')')


def _check_training_set(x, y):
    x = as_matrix(x, 'x')
    y = as_vector(y, 'y')
    if x.shape[0] == 0:
        raise EmptyTrainingSet('cannot fit on zero samples')
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch('x has ' + str(x.shape[0]) + ' rows but y has '
                                + str(y.shape[0]) + ' entries')
    return x, y


def fit(x, y, kernel, noise_variance, center=True,
        jitter_policy=DEFAULT_JITTER):
    """Fit a Gaussian process regressor.

    Args:
        x ((*n*, *d*) array_like): Training inputs.
        y ((*n*,) array_like): Training targets.
        kernel (`kremu.kernels.Kernel`): Covariance function.
        noise_variance (float): Observation noise variance, ``>= 0``.
        center (bool): Subtract the target mean before the fit.
        jitter_policy (`kremu.numerics.JitterPolicy`): Jitter ladder used when
            ``K + noise_variance * I`` is numerically singular.

    Returns:
        `GprModel`: The fitted model.

    Raises:
        EmptyTrainingSet: *x* has no rows.
        InvalidHyperparameter: *noise_variance* is negative.
        NotPositiveDefinite: The jitter ladder is exhausted.
    """
    x, y = _check_training_set(x, y)
    noise_variance = float(noise_variance)
    if not (math.isfinite(noise_variance) and noise_variance >= 0):
        raise kernels.InvalidHyperparameter('noise variance must be >= 0, got '
                                            + repr(noise_variance))

    y_mean = float(numpy.mean(y)) if center else 0.0
    k = kernels.kernel_matrix(kernel, x).m
    k[numpy.diag_indices_from(k)] += noise_variance
    factor = cholesky(k, jitter_policy)
    alpha = solve_cholesky(factor, y - y_mean)

    return GprModel(x_train=x,
                    alpha=alpha,
                    factor=factor,
                    kernel=kernel,
                    noise_variance=noise_variance,
                    y_mean=y_mean)


def predict(m, xq):
    """Posterior mean and variance at query points.

    Args:
        m (`GprModel`): Fitted model.
        xq ((*q*, *d*) array_like): Query inputs.

    Returns:
        `Posterior`: Mean ``y_mean + K*^T alpha`` and variance
        ``k(x, x) - v^T v`` with ``v = l^-1 k*``.

    Raises:
        DimensionMismatch: *xq* has a different column count than the
            training inputs.
    """
    xq = as_matrix(xq, 'xq')
    if xq.shape[1] != m.x_train.shape[1]:
        raise DimensionMismatch('query has ' + str(xq.shape[1])
                                + ' columns, model was trained on '
                                + str(m.x_train.shape[1]))

    k_star = kernels.kernel_matrix(m.kernel, m.x_train, xq).m
    mean = m.y_mean + k_star.T @ m.alpha

    v = solve_lower(m.factor.l, k_star)
    prior = kernels.kernel_diagonal(m.kernel, xq)
    variance = prior - numpy.sum(v * v, axis=0)
    if variance.size and variance.min() < -1e-10 * max(1.0, prior.max()):
        logger.warning('posterior variance ' + str(variance.min())
                       + ' clamped to 0')
    return Posterior(mean=mean, variance=numpy.maximum(variance, 0.0))


def log_marginal_likelihood(m, y):
    """Log marginal likelihood of the training targets.

    ``-0.5 (y - y_mean)^T alpha - sum(log diag(l)) - n/2 log(2 pi)``

    Args:
        m (`GprModel`): Model fitted on *y*.
        y ((*n*,) array_like): The training targets.

    Returns:
        float: The log marginal likelihood.

    Raises:
        DimensionMismatch: *y* does not match the training set size.
    """
    y = as_vector(y, 'y')
    n = m.n_train
    if y.shape[0] != n:
        raise DimensionMismatch('y has ' + str(y.shape[0])
                                + ' entries, model was trained on ' + str(n))

    data_fit = -0.5 * float(numpy.dot(y - m.y_mean, m.alpha))
    complexity = -float(numpy.sum(numpy.log(numpy.diag(m.factor.l))))
    return data_fit + complexity - 0.5 * n * math.log(2.0 * math.pi)


def _grid(values, name):
    if values is None:
        return [None]
    values = list(values)
    if len(values) == 0:
        raise EmptyGrid(name + ' grid is empty')
    return values


def grid_select(x, y, kernel, ls_grid=None, var_grid=None, noise_grid=(1e-4,),
                center=True, jitter_policy=DEFAULT_JITTER):
    """Select hyperparameters by maximizing the log marginal likelihood.

    Grid points are visited with the lengthscale in the outer loop, the
    variance in the middle loop and the noise variance in the inner loop. The
    first grid point reaching the maximum wins. Grid points whose covariance
    matrix cannot be factored are skipped.

    Args:
        x ((*n*, *d*) array_like): Training inputs.
        y ((*n*,) array_like): Training targets.
        kernel (`kremu.kernels.Kernel`): Kernel template, see
            `kremu.kernels.retune`.
        ls_grid (list[float]): Lengthscales, or None to keep the template's.
        var_grid (list[float]): Signal variances, or None to keep the
            template's.
        noise_grid (list[float]): Noise variances.
        center (bool): Subtract the target mean before each fit.
        jitter_policy (`kremu.numerics.JitterPolicy`): Jitter ladder.

    Returns:
        `GprModel`: The model fitted at the selected grid point.

    Raises:
        EmptyGrid: A grid is given as an empty list.
        NotPositiveDefinite: No grid point could be factored.
    """
    x, y = _check_training_set(x, y)
    ls_values = _grid(ls_grid, 'lengthscale')
    var_values = _grid(var_grid, 'variance')
    noise_values = _grid(noise_grid, 'noise')
    if noise_values == [None]:
        raise EmptyGrid('noise grid is required')

    best = None
    best_lml = -math.inf
    for ls, var, noise in itertools.product(ls_values, var_values,
                                            noise_values):
        candidate = kernels.retune(kernel, ls=ls, var=var)
        try:
            model = fit(x, y, candidate, noise, center, jitter_policy)
        except NotPositiveDefinite:
            logger.warning('skipping grid point ls=' + str(ls) + ' var='
                           + str(var) + ' noise=' + str(noise)
                           + ': not positive definite')
            continue
        lml = log_marginal_likelihood(model, y)
        logger.debug('ls=' + str(ls) + ' var=' + str(var) + ' noise='
                     + str(noise) + ' lml=' + str(lml))
        if best is None or lml > best_lml:
            best = model
            best_lml = lml

    if best is None:
        raise NotPositiveDefinite('no grid point could be factored')

    logger.info('selected ' + kernels.print_kernel(best.kernel) + ' noise='
                + str(best.noise_variance) + ' (lml ' + str(best_lml) + ')')
    return best


def confidence_interval(posterior, z=1.96):
    """Return ``(lower, upper) = mean -/+ z * sqrt(variance)``."""
    half_width = z * numpy.sqrt(posterior.variance)
    return posterior.mean - half_width, posterior.mean + half_width
