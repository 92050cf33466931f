# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Epsilon-insensitive support vector regression.

The dual problem in terms of ``beta = alpha - alpha*``::

    maximize    -1/2 beta^T K beta - epsilon ||beta||_1 + y^T beta
    subject to  sum(beta) = 0,  -C <= beta_i <= C

is solved by sequential minimal optimization: each step moves one pair
``(beta_i, beta_j)`` along ``e_i - e_j``, which keeps the equality
constraint, to the exact maximum of the piecewise quadratic objective on the
feasible segment.

The pair is chosen from the bounds the KKT conditions place on the bias.
With ``g = y - K beta`` each index bounds the bias from below by ``l_i`` and
from above by ``u_i``:

============================ ================ ================
state                        ``l_i``          ``u_i``
============================ ================ ================
``beta_i = -C``              ``g_i + eps``    ``+inf``
``-C < beta_i < 0``          ``g_i + eps``    ``g_i + eps``
``beta_i = 0``               ``g_i - eps``    ``g_i + eps``
``0 < beta_i < C``           ``g_i - eps``    ``g_i - eps``
``beta_i = C``               ``-inf``         ``g_i - eps``
============================ ================ ================

The iterate is optimal when ``max(l) <= min(u)``. The solver pairs
``i = argmax(l)`` with ``j = argmin(u)`` and stops when ``l_i - u_j <= tol``.
"""

import logging
import math

import numpy

from . import kernels
from .gpr import _check_training_set
from .kernels import InvalidHyperparameter
from .numerics import DimensionMismatch, NumericalError, as_matrix

logger = logging.getLogger('kremu.svr')

_SNAP = 1e-12


class SvrModel(object):
    """Fitted support vector regressor.

    Attributes:
        x_support ((*s*, *d*) `numpy.ndarray`): Support inputs.
        dual_coef ((*s*,) `numpy.ndarray`): Nonzero ``beta_i``.
        bias (float): Intercept, including the removed target mean.
        kernel (`kremu.kernels.Kernel`): Kernel.
        epsilon (float): Tube half width.
        c (float): Box constraint.
        converged (bool): False when the solver stopped at ``max_iter``.
        n_iter (int): Number of pair updates.
        objective (float): Final dual objective on the centered targets.
    """

    def __init__(self, x_support, dual_coef, bias, kernel, epsilon, c,
                 converged=True, n_iter=0, objective=0.0):
        self.x_support = x_support
        self.dual_coef = dual_coef
        self.bias = bias
        self.kernel = kernel
        self.epsilon = epsilon
        self.c = c
        self.converged = converged
        self.n_iter = n_iter
        self.objective = objective

    @property
    def n_support(self):
        """int: Number of support vectors."""
        return self.dual_coef.shape[0]

    def __repr__(self):
        return ('SvrModel(kernel=' + repr(kernels.print_kernel(self.kernel))
                + ', epsilon=' + repr(self.epsilon) + ', c=' + repr(self.c)
                + ', n_support=' + str(self.n_support) + ')')


def dual_objective(k, y, beta, epsilon):
    """Evaluate ``-1/2 beta^T K beta - epsilon ||beta||_1 + y^T beta``."""
    return float(-0.5 * beta @ k @ beta - epsilon * numpy.sum(numpy.abs(beta))
                 + y @ beta)


def _bias_bounds(g, beta, epsilon, c):
    lower = numpy.where(beta < 0, g + epsilon,
                        numpy.where(beta < c, g - epsilon, -math.inf))
    upper = numpy.where(beta > 0, g - epsilon,
                        numpy.where(beta > -c, g + epsilon, math.inf))
    return lower, upper


def _gain(t, gi, gj, eta, bi, bj, epsilon):
    return (t * (gi - gj) - 0.5 * eta * t * t
            - epsilon * (abs(bi + t) + abs(bj - t) - abs(bi) - abs(bj)))


def _line_search(gi, gj, eta, bi, bj, epsilon, c):
    """Best step t for ``beta_i += t, beta_j -= t`` and its gain."""
    lo = max(-c - bi, bj - c)
    hi = min(c - bi, bj + c)

    candidates = [lo, hi, 0.0]
    for breakpoint in (-bi, bj):
        if lo < breakpoint < hi:
            candidates.append(breakpoint)
    if eta > 1e-12:
        for si in (-1.0, 1.0):
            for sj in (-1.0, 1.0):
                t = ((gi - gj) - epsilon * (si - sj)) / eta
                if lo < t < hi:
                    candidates.append(t)

    best_t = 0.0
    best_gain = 0.0
    for t in candidates:
        gain = _gain(t, gi, gj, eta, bi, bj, epsilon)
        if gain > best_gain:
            best_t = t
            best_gain = gain
    return best_t, best_gain


def _snap(value, c):
    """Move values within rounding distance of 0 or +/-C onto them."""
    if abs(value) <= _SNAP * c:
        return 0.0
    if abs(value - c) <= _SNAP * c:
        return c
    if abs(value + c) <= _SNAP * c:
        return -c
    return value


def _intercept(g, beta, epsilon, c):
    magnitude = numpy.abs(beta)
    free = (magnitude > _SNAP * c) & (magnitude < c * (1 - _SNAP))
    if numpy.any(free):
        return float(
            numpy.mean(g[free] - epsilon * numpy.sign(beta[free])))
    lower, upper = _bias_bounds(g, beta, epsilon, c)
    return 0.5 * (float(numpy.max(lower)) + float(numpy.min(upper)))


def fit(x,
        y,
        kernel,
        epsilon=0.05,
        c=10.0,
        tol=1e-3,
        max_iter=100000,
        center=True,
        debug=False):
    """Fit an epsilon-insensitive support vector regressor.

    Args:
        x ((*n*, *d*) array_like): Training inputs.
        y ((*n*,) array_like): Training targets.
        kernel (`kremu.kernels.Kernel`): Kernel.
        epsilon (float): Tube half width, ``>= 0``.
        c (float): Box constraint, ``> 0``.
        tol (float): Stop when the largest KKT violation is at most *tol*.
        max_iter (int): Limit on SMO pair updates. One update moves two
            coordinates of ``beta``; it is the unit counted in ``n_iter``.
        center (bool): Subtract the target mean before the fit.
        debug (bool): Check after every update that the dual objective did
            not decrease.

    Returns:
        `SvrModel`: The fitted model. ``converged`` is False when *max_iter*
        was reached first.

    Raises:
        EmptyTrainingSet: *x* has no rows.
        InvalidHyperparameter: A solver parameter is out of range.
    """
    x, y = _check_training_set(x, y)
    epsilon = float(epsilon)
    c = float(c)
    if not (math.isfinite(epsilon) and epsilon >= 0):
        raise InvalidHyperparameter('epsilon must be >= 0, got '
                                    + repr(epsilon))
    if not (math.isfinite(c) and c > 0):
        raise InvalidHyperparameter('C must be > 0, got ' + repr(c))
    if not tol > 0:
        raise InvalidHyperparameter('tol must be > 0, got ' + repr(tol))
    if int(max_iter) < 1:
        raise InvalidHyperparameter('max_iter must be >= 1, got '
                                    + repr(max_iter))

    n = x.shape[0]
    y_mean = float(numpy.mean(y)) if center else 0.0
    yc = y - y_mean
    k = kernels.kernel_matrix(kernel, x).m
    beta = numpy.zeros(n)
    g = yc.copy()
    objective = 0.0

    converged = False
    n_iter = 0
    while True:
        lower, upper = _bias_bounds(g, beta, epsilon, c)
        i = int(numpy.argmax(lower))
        j = int(numpy.argmin(upper))
        violation = lower[i] - upper[j]
        if violation <= tol or i == j:
            converged = True
            break
        if n_iter >= max_iter:
            break

        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        t, gain = _line_search(g[i], g[j], eta, beta[i], beta[j], epsilon, c)
        if gain <= 0.0:
            logger.warning('SMO step on pair (' + str(i) + ', ' + str(j)
                           + ') made no progress at violation '
                           + str(violation))
            break

        new_i = _snap(beta[i] + t, c)
        new_j = _snap(beta[j] - t, c)
        di = new_i - beta[i]
        dj = new_j - beta[j]
        beta[i] = new_i
        beta[j] = new_j
        g -= di * k[:, i] + dj * k[:, j]
        n_iter += 1

        if debug:
            current = dual_objective(k, yc, beta, epsilon)
            if current < objective - 1e-12 * (1.0 + abs(objective)):
                raise NumericalError('dual objective decreased from '
                                     + str(objective) + ' to '
                                     + str(current) + ' at iteration '
                                     + str(n_iter))
            objective = current

    if not converged:
        logger.warning('SMO stopped after ' + str(n_iter)
                       + ' updates without reaching tol=' + str(tol))
    objective = dual_objective(k, yc, beta, epsilon)
    bias = y_mean + _intercept(g, beta, epsilon, c)
    support = beta != 0.0
    logger.debug('SMO finished: ' + str(n_iter) + ' updates, '
                 + str(int(numpy.sum(support))) + ' support vectors, '
                 'objective ' + str(objective))

    return SvrModel(x_support=numpy.ascontiguousarray(x[support]),
                    dual_coef=beta[support],
                    bias=bias,
                    kernel=kernel,
                    epsilon=epsilon,
                    c=c,
                    converged=converged,
                    n_iter=n_iter,
                    objective=objective)


def predict(m, xq):
    """Evaluate ``f(xq) = sum_i beta_i k(x_i, xq) + bias``.

    Args:
        m (`SvrModel`): Fitted model.
        xq ((*q*, *d*) array_like): Query inputs.

    Returns:
        (*q*,) `numpy.ndarray`: Predictions.

    Raises:
        DimensionMismatch: Column count differs from the training inputs.
    """
    xq = as_matrix(xq, 'xq')
    if xq.shape[1] != m.x_support.shape[1]:
        raise DimensionMismatch('query has ' + str(xq.shape[1])
                                + ' columns, model was trained on '
                                + str(m.x_support.shape[1]))
    if m.n_support == 0:
        return numpy.full(xq.shape[0], m.bias)
    k = kernels.kernel_matrix(m.kernel, xq, m.x_support).m
    return k @ m.dual_coef + m.bias

