# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Test kremu.gpr."""

import logging
import math

import numpy
import pytest

from kremu import gpr, kernels, krr
from kremu.kernels import (Bias, InvalidHyperparameter, Linear, Matern32,
                           RBF, White)
from kremu.numerics import DimensionMismatch

from kremu.test.conftest import gp_conditioning, random_kernel


def test_conditioning_oracle(rng):
    """Test posterior mean and variance against explicit conditioning."""
    for _ in range(50):
        n = int(rng.integers(1, 11))
        d = int(rng.integers(1, 4))
        kernel = random_kernel(rng, depth=2) + RBF(ls=rng.uniform(0.5, 2.0))
        noise = rng.uniform(0.05, 0.5)
        x = rng.standard_normal((n, d))
        y = rng.standard_normal(n)
        xq = rng.standard_normal((3, d))

        m = gpr.fit(x, y, kernel, noise, center=False)
        post = gpr.predict(m, xq)
        mean, variance = gp_conditioning(kernel, x, y, xq, noise)
        numpy.testing.assert_allclose(post.mean, mean, atol=1e-8)
        numpy.testing.assert_allclose(post.variance, numpy.maximum(variance,
                                                                   0.0),
                                      atol=1e-8)


def test_interpolates_without_noise():
    """Test that a noiseless GP reproduces its training targets."""
    x = numpy.linspace(0.0, 3.0, 6)[:, None]
    y = numpy.sin(x[:, 0])
    m = gpr.fit(x, y, Matern32(ls=1.0), 0.0)
    post = gpr.predict(m, x)
    numpy.testing.assert_allclose(post.mean, y, atol=1e-6)
    assert numpy.all(post.variance < 1e-6)


def test_linear_kernel_recovers_linear_function():
    """Test exact recovery of a linear map with a linear kernel."""
    rng = numpy.random.default_rng(5)
    x = rng.standard_normal((20, 3))
    w = numpy.array([0.5, -1.0, 2.0])
    m = gpr.fit(x, x @ w + 1.5, Linear(var=10.0) + Bias(var=10.0), 1e-6)
    xq = rng.standard_normal((5, 3))
    numpy.testing.assert_allclose(gpr.predict(m, xq).mean, xq @ w + 1.5,
                                  atol=1e-4)


def test_far_query_reverts_to_prior(rng):
    """Test the posterior far from the data."""
    x = rng.standard_normal((5, 1))
    y = rng.standard_normal(5) + 3.0
    m = gpr.fit(x, y, RBF(ls=0.5, var=2.0), 0.01)
    post = gpr.predict(m, [[1e3]])
    assert post.mean[0] == pytest.approx(numpy.mean(y))
    assert post.variance[0] == pytest.approx(2.0)


def test_single_sample():
    """Test n = 1."""
    m = gpr.fit([[0.0]], [2.0], RBF(), 0.5, center=False)
    post = gpr.predict(m, [[0.0]])
    assert post.mean[0] == pytest.approx(2.0 / 1.5)
    assert post.variance[0] == pytest.approx(1.0 - 1.0 / 1.5)


def test_gpr_equals_krr(rng):
    """Test that the GPR mean is the KRR prediction with lam = noise."""
    for _ in range(100):
        n = int(rng.integers(1, 51))
        d = int(rng.integers(1, 6))
        kernel = random_kernel(rng, depth=2) + Matern32(
            ls=rng.uniform(0.5, 3.0))
        noise = rng.uniform(0.01, 1.0)
        x = rng.standard_normal((n, d))
        y = rng.standard_normal(n)
        xq = rng.standard_normal((4, d))
        mean = gpr.predict(gpr.fit(x, y, kernel, noise, center=False),
                           xq).mean
        pred = krr.predict(krr.fit(x, y, kernel, noise, center=False), xq)
        assert numpy.max(numpy.abs(mean - pred)) <= 1e-8


def test_log_marginal_likelihood_single_point():
    """Test the LML of one sample against the Gaussian density."""
    y = 1.3
    for var in (0.5, 1.0, 2.0):
        m = gpr.fit([[0.0]], [y], Bias(var=var), 0.0, center=False)
        expected = -0.5 * y * y / var - 0.5 * math.log(2 * math.pi * var)
        assert gpr.log_marginal_likelihood(m, [y]) == pytest.approx(expected)


def test_log_marginal_likelihood_stationary_variance():
    """Test that the one point LML peaks at var = y**2."""
    y = 1.7

    def lml(var):
        m = gpr.fit([[0.0]], [y], Bias(var=var), 0.0, center=False)
        return gpr.log_marginal_likelihood(m, [y])

    h = 1e-5
    v = y * y
    assert (lml(v + h) - lml(v - h)) / (2 * h) == pytest.approx(0.0, abs=1e-6)
    assert lml(v) > lml(0.5 * v)
    assert lml(v) > lml(2.0 * v)


def test_log_marginal_likelihood_multivariate(rng):
    """Test the LML against the multivariate normal density."""
    x = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    kernel = Matern32(ls=1.2, var=0.8)
    m = gpr.fit(x, y, kernel, 0.1)
    k = m.factor.l @ m.factor.l.T
    r = y - m.y_mean
    _, logdet = numpy.linalg.slogdet(k)
    expected = (-0.5 * r @ numpy.linalg.solve(k, r) - 0.5 * logdet
                - 3.0 * math.log(2 * math.pi))
    assert gpr.log_marginal_likelihood(m, y) == pytest.approx(expected)
    with pytest.raises(DimensionMismatch):
        gpr.log_marginal_likelihood(m, y[:3])


def test_centering():
    """Test that the training mean is added back to predictions."""
    x = [[0.0], [1.0], [2.0]]
    y = numpy.array([10.0, 11.0, 12.0])
    m = gpr.fit(x, y, RBF(), 0.01)
    assert m.y_mean == pytest.approx(11.0)
    assert gpr.fit(x, y, RBF(), 0.01, center=False).y_mean == 0.0


def test_fit_errors():
    """Test invalid training sets."""
    with pytest.raises(gpr.EmptyTrainingSet):
        gpr.fit(numpy.zeros((0, 2)), numpy.zeros(0), RBF(), 0.1)
    with pytest.raises(DimensionMismatch):
        gpr.fit(numpy.zeros((3, 2)), numpy.zeros(2), RBF(), 0.1)
    with pytest.raises(InvalidHyperparameter):
        gpr.fit(numpy.zeros((3, 2)), numpy.zeros(3), RBF(), -0.1)
    m = gpr.fit(numpy.zeros((1, 2)), numpy.zeros(1), RBF(), 0.1)
    with pytest.raises(DimensionMismatch):
        gpr.predict(m, numpy.zeros((1, 3)))


def test_duplicate_inputs_need_jitter(caplog):
    """Test that repeated inputs without noise are factored with jitter."""
    x = [[1.0], [1.0], [2.0]]
    with caplog.at_level(logging.WARNING, logger='kremu.numerics'):
        m = gpr.fit(x, [0.5, 0.5, 1.0], RBF(), 0.0)
    assert m.factor.jitter_applied > 0
    assert 'jitter' in caplog.text


def test_grid_select_finds_lengthscale():
    """Test that the evidence prefers the generating lengthscale."""
    rng = numpy.random.default_rng(11)
    x = numpy.sort(rng.uniform(0, 10, 40))[:, None]
    y = numpy.sin(x[:, 0]) + 0.05 * rng.standard_normal(40)
    m = gpr.grid_select(x, y, RBF(), ls_grid=[0.05, 1.0, 50.0],
                        noise_grid=[0.0025])
    assert m.kernel == RBF(ls=1.0)
    assert m.noise_variance == 0.0025


def test_grid_select_keeps_template():
    """Test that None keeps the template hyperparameters."""
    template = Matern32(ls=0.7, var=1.3) + White(var=0.01)
    m = gpr.grid_select([[0.0], [1.0], [2.0]], [0.1, 0.5, 0.2], template,
                        noise_grid=[0.1, 0.2])
    assert m.kernel == template


def test_grid_select_empty():
    """Test empty grids."""
    with pytest.raises(gpr.EmptyGrid):
        gpr.grid_select([[0.0]], [1.0], RBF(), ls_grid=[])
    with pytest.raises(gpr.EmptyGrid):
        gpr.grid_select([[0.0]], [1.0], RBF(), noise_grid=[])


def test_variance_grows_with_noise(rng):
    """Test that more observation noise never lowers posterior variance."""
    for _ in range(50):
        n = int(rng.integers(1, 16))
        d = int(rng.integers(1, 4))
        kernel = random_kernel(rng, depth=2) + Matern32(
            ls=rng.uniform(0.5, 2.0))
        x = rng.standard_normal((n, d))
        y = rng.standard_normal(n)
        xq = rng.standard_normal((5, d))
        prior = kernels.kernel_diagonal(kernel, xq)
        last = None
        for noise in (0.01, 0.1, 1.0):
            variance = gpr.predict(gpr.fit(x, y, kernel, noise), xq).variance
            assert numpy.all(variance <= prior + 1e-10)
            if last is not None:
                assert numpy.all(variance >= last - 1e-12)
            last = variance


def test_confidence_interval():
    """Test the interval half width."""
    post = gpr.Posterior(mean=numpy.array([1.0, 2.0]),
                         variance=numpy.array([4.0, 0.0]))
    lower, upper = gpr.confidence_interval(post)
    numpy.testing.assert_allclose(lower, [1.0 - 3.92, 2.0])
    numpy.testing.assert_allclose(upper, [1.0 + 3.92, 2.0])


@pytest.mark.validate
def test_grid_select_monte_carlo(validate_seeds):
    """Test lengthscale recovery over many seeds."""
    hits = 0
    for seed in validate_seeds:
        rng = numpy.random.default_rng(seed)
        x = numpy.sort(rng.uniform(0, 20, 50))[:, None]
        cov = kernels.kernel_matrix(Matern32(ls=2.0), x).m
        cov += 0.01 * numpy.eye(50)
        y = numpy.linalg.cholesky(cov) @ rng.standard_normal(50)
        m = gpr.grid_select(x, y, Matern32(), ls_grid=[1.0, 2.0, 4.0],
                            noise_grid=[0.01])
        hits += m.kernel.lengthscale == 2.0
    assert hits >= 0.8 * len(validate_seeds)
