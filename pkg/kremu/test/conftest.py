# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Pytest fixtures and reference computations common to all tests."""

import itertools

import numpy
import pytest

from kremu import kernels
from kremu.data import synth_scenarios


def random_spd(rng, n, condition=10.0):
    """Random symmetric positive definite matrix with a bounded condition."""
    q, _ = numpy.linalg.qr(rng.standard_normal((n, n)))
    values = numpy.geomspace(1.0, condition, n)
    a = (q * values) @ q.T
    return 0.5 * (a + a.T)


def gauss_jordan_inverse(a):
    """Invert *a* by Gauss-Jordan elimination with partial pivoting."""
    a = numpy.array(a, dtype=numpy.float64)
    n = a.shape[0]
    aug = numpy.hstack([a, numpy.eye(n)])
    for col in range(n):
        pivot = col + int(numpy.argmax(numpy.abs(aug[col:, col])))
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] /= aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, n:]


_LEAVES = {
    'rbf': lambda rng: kernels.RBF(ls=rng.uniform(0.3, 3.0),
                                   var=rng.uniform(0.2, 2)),
    'matern12': lambda rng: kernels.Matern12(ls=rng.uniform(0.3, 3.0),
                                             var=rng.uniform(0.2, 2)),
    'matern32': lambda rng: kernels.Matern32(ls=rng.uniform(0.3, 3.0),
                                             var=rng.uniform(0.2, 2)),
    'matern52': lambda rng: kernels.Matern52(ls=rng.uniform(0.3, 3.0),
                                             var=rng.uniform(0.2, 2)),
    'linear': lambda rng: kernels.Linear(var=rng.uniform(0.2, 2)),
    'bias': lambda rng: kernels.Bias(var=rng.uniform(0.2, 2)),
    'white': lambda rng: kernels.White(var=rng.uniform(0.01, 0.5)),
}


def random_kernel(rng, depth=3, exclude=()):
    """Random kernel tree of at most *depth* levels.

    Leaves named in *exclude* (catalog names such as ``'white'``) are never
    drawn.
    """
    leaves = [f for name, f in _LEAVES.items() if name not in exclude]
    if depth <= 1 or rng.uniform() < 0.4:
        return leaves[int(rng.integers(len(leaves)))](rng)
    left = random_kernel(rng, depth - 1, exclude)
    right = random_kernel(rng, depth - 1, exclude)
    return left + right if rng.uniform() < 0.5 else left * right


def gp_conditioning(kernel, x, y, xq, noise_variance):
    """Joint Gaussian conditioning with an explicit inverse."""
    k = kernels.kernel_matrix(kernel, x).m + noise_variance * numpy.eye(len(x))
    k_star = kernels.kernel_matrix(kernel, x, xq).m
    k_qq = kernels.kernel_matrix(kernel, xq).m
    inverse = gauss_jordan_inverse(k)
    mean = k_star.T @ inverse @ y
    cov = k_qq - k_star.T @ inverse @ k_star
    return mean, numpy.diag(cov)


def svr_dual_oracle(k, y, epsilon, c):
    """Maximum of the SVR dual by enumerating active sets.

    Every coordinate of ``beta`` is either at a bound (``-C``, ``0``, ``C``)
    or free with a fixed sign. For each assignment the objective restricted
    to the free coordinates is a concave quadratic under ``sum(beta) = 0``,
    solved through its KKT system. The best feasible candidate is returned.
    """
    n = len(y)
    best = -numpy.inf
    for states in itertools.product(('-C', '0', 'C', '-', '+'), repeat=n):
        beta = numpy.zeros(n)
        free = []
        sign = numpy.zeros(n)
        for i, state in enumerate(states):
            if state == '-C':
                beta[i] = -c
            elif state == 'C':
                beta[i] = c
            elif state in ('-', '+'):
                free.append(i)
                sign[i] = -1.0 if state == '-' else 1.0
        fixed = [i for i in range(n) if i not in free]
        if free:
            kf = k[numpy.ix_(free, free)]
            rhs = y[free] - epsilon * sign[free] - k[numpy.ix_(
                free, fixed)] @ beta[fixed]
            m = len(free)
            system = numpy.zeros((m + 1, m + 1))
            system[:m, :m] = kf
            system[:m, m] = 1.0
            system[m, :m] = 1.0
            target = numpy.concatenate([rhs, [-numpy.sum(beta[fixed])]])
            try:
                solution = numpy.linalg.lstsq(system, target, rcond=None)[0]
            except numpy.linalg.LinAlgError:
                continue
            beta[free] = solution[:m]
            if numpy.any(sign[free] * beta[free] < -1e-12):
                continue
            if numpy.any(numpy.abs(beta[free]) > c + 1e-12):
                continue
        if abs(numpy.sum(beta)) > 1e-9:
            continue
        value = (-0.5 * beta @ k @ beta - epsilon * numpy.sum(numpy.abs(beta))
                 + y @ beta)
        best = max(best, value)
    return best


@pytest.fixture
def rng():
    """Seeded random generator."""
    return numpy.random.default_rng(20240531)


@pytest.fixture(scope='module')
def small_scenarios():
    """Four small synthetic scenarios: 24 years on a 4x6 grid."""
    return synth_scenarios(seed=3, n_scenarios=4, n_years=24, n_lat=4,
                           n_lon=6, noise=0.05)
