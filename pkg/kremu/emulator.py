# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Field emulator: forcings to gridded outputs.

`Emulator` chains the pieces of the pipeline for each output variable:

1. `kremu.data.FeatureBuilder` turns the yearly forcings into features,
   standardized on the training years.
2. `kremu.reduce.fit` computes an EOF basis of the pooled training fields.
3. One regressor (``gpr``, ``svr`` or ``krr``) per EOF coefficient maps the
   features to the coefficient, divided by its training standard deviation.
4. Predicted coefficients are rescaled and reconstructed to fields.

Fitted emulators are saved to and loaded from model bundles, see
:py:mod:`kremu.bundle`.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy

from . import gpr, kernels, krr, reduce, svr
from .bundle import BundleError, BundleFile, BundleWriter
from .config import RunConfig
from .data import (EmptyDataset, FeatureBuilder, GridMismatch,
                   MissingVariable, check_same_grid)
from .numerics import CholeskyFactor
from .version import __version__

logger = logging.getLogger('kremu.emulator')


class UnsupportedOperation(ValueError):
    """The operation is not available for the configured regressor."""


def fit_component(config, x, y):
    """Fit the configured regressor to one target column.

    GPR uses a grid search when any of ``ls_grid``, ``var_grid`` or
    ``noise_grid`` is set. KRR uses cross-validation when ``cv`` is set.

    Args:
        config (`kremu.config.RunConfig`): Run options.
        x ((*n*, *F*) `numpy.ndarray`): Features.
        y ((*n*,) `numpy.ndarray`): Targets.

    Returns:
        `kremu.gpr.GprModel`, `kremu.svr.SvrModel` or `kremu.krr.KrrModel`
    """
    if config.model == 'gpr':
        if config.ls_grid or config.var_grid or config.noise_grid:
            return gpr.grid_select(x, y, config.kernel,
                                   ls_grid=config.ls_grid or None,
                                   var_grid=config.var_grid or None,
                                   noise_grid=config.noise_grid
                                   or [config.noise])
        return gpr.fit(x, y, config.kernel, config.noise)
    if config.model == 'svr':
        return svr.fit(x, y, config.kernel, config.epsilon, config.c,
                       config.tol, config.max_iter)
    if config.cv:
        candidates = config.cv_kernels or krr.default_grid().kernel_candidates
        grid = krr.CvGrid(config.lambdas, candidates, config.folds)
        return krr.cv_select(x, y, grid, config.seed)[0]
    return krr.fit(x, y, config.kernel, config.lam)


def predict_component(model, x):
    """Point predictions of a fitted regressor."""
    if isinstance(model, gpr.GprModel):
        return gpr.predict(model, x).mean
    if isinstance(model, svr.SvrModel):
        return svr.predict(model, x)
    return krr.predict(model, x)


class VariableModel(object):
    """Emulator of one output variable.

    Attributes:
        basis (`kremu.reduce.EofBasis`): EOF basis of the training fields.
        target_scale ((*k*,) `numpy.ndarray`): Divisor of each coefficient.
        models (list): One fitted regressor per coefficient.
    """

    def __init__(self, basis, target_scale, models):
        self.basis = basis
        self.target_scale = target_scale
        self.models = models


class Emulator(object):
    """Per-variable EOF emulator.

    Args:
        config (`kremu.config.RunConfig`): Run options. Defaults to
            ``RunConfig()``.

    Attributes:
        config (`kremu.config.RunConfig`): Run options.
        features (`kremu.data.FeatureBuilder`): Frozen featurization.
        variables (dict[str, `VariableModel`]): Fitted variables.
        lat ((*L*,) `numpy.ndarray`): Training grid latitudes.
        n_lon (int): Training grid columns.
    """

    def __init__(self, config=None):
        self.config = config if config is not None else RunConfig()
        self.features = None
        self.variables = {}
        self.lat = None
        self.n_lon = None

    @property
    def grid_shape(self):
        """tuple[int, int]: Training grid shape."""
        return (len(self.lat), self.n_lon)

    def _map(self, fn, items):
        if self.config.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.config.jobs) as executor:
                return list(executor.map(fn, items))
        return [fn(item) for item in items]

    def fit(self, datasets):
        """Fit the emulator.

        Args:
            datasets (list[`kremu.data.ScenarioDataset`]): Training scenarios
                on one grid. Years are pooled.

        Returns:
            `Emulator`: self

        Raises:
            EmptyDataset: No training datasets.
            GridMismatch: The datasets use different grids.
            MissingVariable: A configured variable is absent from a dataset.
        """
        datasets = list(datasets)
        if not datasets:
            raise EmptyDataset('no training datasets')
        for d in datasets[1:]:
            check_same_grid(datasets[0], d)
        for variable in self.config.variables:
            for d in datasets:
                if variable not in d.outputs:
                    raise MissingVariable('training dataset ' + str(d.name)
                                          + ' has no ' + variable)

        self.lat = datasets[0].lat.copy()
        self.n_lon = datasets[0].n_lon
        self.features = FeatureBuilder(self.config.feature_mode,
                                       self.config.feature_k).fit(datasets)
        x = numpy.vstack([self.features.transform(d).x for d in datasets])

        self.variables = {}
        for variable in self.config.variables:
            fields = numpy.vstack([
                d.outputs[variable].reshape(d.n_years, -1) for d in datasets
            ])
            k = min(self.config.eof_k, fields.shape[0], fields.shape[1])
            if k < self.config.eof_k:
                logger.warning('eof_k reduced to ' + str(k) + ' for '
                               + variable)
            logger.info('fitting ' + variable + ': ' + self.config.model
                        + ' on ' + str(fields.shape[0]) + ' years, '
                        + str(k) + ' components')
            basis = reduce.fit(fields, k)
            coeffs = reduce.project(basis, fields)
            if self.config.standardize_targets:
                std = numpy.std(coeffs, axis=0)
                scale = numpy.where(std > 1e-12 * max(1.0, numpy.max(std)),
                                    std, 1.0)
            else:
                scale = numpy.ones(k)
            targets = coeffs / scale

            models = self._map(
                lambda i: fit_component(self.config, x, targets[:, i]),
                range(k))
            self.variables[variable] = VariableModel(basis, scale, models)
        return self

    def _features(self, d):
        if self.features is None:
            raise RuntimeError('Emulator is not fitted')
        if d.grid_shape != self.grid_shape or not numpy.array_equal(
                d.lat, self.lat):
            raise GridMismatch('dataset ' + str(d.name) + ' grid '
                               + str(d.grid_shape)
                               + ' differs from the training grid '
                               + str(self.grid_shape))
        return self.features.transform(d).x

    def predict(self, d):
        """Predict all fitted variables for the forcings of *d*.

        Args:
            d (`kremu.data.ScenarioDataset`): Inputs on the training grid.

        Returns:
            `kremu.data.ScenarioDataset`: *d* inputs with predicted outputs.

        Raises:
            GridMismatch: *d* is not on the training grid.
        """
        x = self._features(d)
        outputs = {}
        for variable, vm in self.variables.items():
            coeffs = numpy.column_stack(
                [predict_component(m, x) for m in vm.models])
            fields = reduce.reconstruct(vm.basis, coeffs * vm.target_scale)
            outputs[variable] = fields.reshape((d.n_years, ) + d.grid_shape)
        return d.with_outputs(outputs)

    def predict_variance(self, d):
        """Predictive variance of each grid cell (GPR only).

        The coefficient posteriors are independent, so the variance of cell
        *g* is ``sum_j var_j * scale_j**2 * component_j[g]**2``.

        Returns:
            `kremu.data.ScenarioDataset`: *d* inputs with variance fields as
            outputs.

        Raises:
            UnsupportedOperation: The regressor is not GPR.
            GridMismatch: *d* is not on the training grid.
        """
        if self.config.model != 'gpr':
            raise UnsupportedOperation('predictive variance needs model gpr, '
                                       'not ' + self.config.model)
        x = self._features(d)
        outputs = {}
        for variable, vm in self.variables.items():
            variance = numpy.column_stack(
                [gpr.predict(m, x).variance for m in vm.models])
            weights = (vm.target_scale**2)[:, None] * vm.basis.components**2
            outputs[variable] = (variance @ weights).reshape(
                (d.n_years, ) + d.grid_shape)
        return d.with_outputs(outputs, name=str(d.name) + '_variance')

    def save(self, path):
        """Write the fitted emulator to a model bundle."""
        if self.features is None:
            raise RuntimeError('Emulator is not fitted')
        with BundleWriter(path) as f:
            f.write_text('kremu/version', __version__)
            f.write_text('config', self.config.to_text())
            f.write_text('grid/variables', ','.join(self.variables))
            f.write_chunk('grid/lat', self.lat)
            f.write_chunk('grid/n_lon', numpy.int64(self.n_lon))

            fb = self.features
            f.write_text('features/mode', fb.mode)
            f.write_chunk('features/k', numpy.int64(fb.k))
            f.write_chunk('features/mean', fb.mean)
            f.write_chunk('features/scale', fb.scale)
            for field, basis in fb.bases.items():
                _write_basis(f, 'features/' + field, basis)

            for variable, vm in self.variables.items():
                _write_basis(f, variable + '/basis', vm.basis)
                f.write_chunk(variable + '/target_scale', vm.target_scale)
                for i, m in enumerate(vm.models):
                    _write_model(f, variable + '/' + str(i), m)

    @classmethod
    def load(cls, path):
        """Read an emulator from a model bundle.

        Raises:
            BundleError: The bundle is malformed or misses chunks.
        """
        with open(path, 'rb') as raw, BundleFile(raw) as f:
            try:
                return cls._load(f)
            except KeyError as error:
                raise BundleError('incomplete model bundle ' + str(path)
                                  + ': ' + str(error)) from error

    @classmethod
    def _load(cls, f):
        em = cls(RunConfig.from_text(f.read_text('config')))
        em.lat = f.read_chunk('grid/lat')
        em.n_lon = int(f.read_scalar('grid/n_lon'))

        fb = FeatureBuilder(f.read_text('features/mode'),
                            int(f.read_scalar('features/k')))
        fb.mean = f.read_chunk('features/mean')
        fb.scale = f.read_chunk('features/scale')
        if fb.mode == 'eof_k':
            for field in ('so2', 'bc'):
                fb.bases[field] = _read_basis(f, 'features/' + field)
        em.features = fb

        names = [v for v in f.read_text('grid/variables').split(',') if v]
        for variable in names:
            basis = _read_basis(f, variable + '/basis')
            models = [
                _read_model(f, variable + '/' + str(i), em.config.model)
                for i in range(basis.k)
            ]
            em.variables[variable] = VariableModel(
                basis, f.read_chunk(variable + '/target_scale'), models)
        return em


def _write_basis(f, prefix, basis):
    f.write_chunk(prefix + '/mean_field', basis.mean_field)
    f.write_chunk(prefix + '/components', basis.components)
    f.write_chunk(prefix + '/singular_values', basis.singular_values)
    f.write_chunk(prefix + '/total_variance',
                  numpy.float64(basis.total_variance))


def _read_basis(f, prefix):
    return reduce.EofBasis(
        mean_field=f.read_chunk(prefix + '/mean_field'),
        components=f.read_chunk(prefix + '/components'),
        singular_values=f.read_chunk(prefix + '/singular_values'),
        total_variance=f.read_scalar(prefix + '/total_variance'))


def _write_model(f, prefix, m):
    f.write_text(prefix + '/kernel', kernels.print_kernel(m.kernel))
    if isinstance(m, gpr.GprModel):
        f.write_chunk(prefix + '/x_train', m.x_train)
        f.write_chunk(prefix + '/alpha', m.alpha)
        f.write_chunk(prefix + '/l', m.factor.l)
        f.write_chunk(prefix + '/jitter',
                      numpy.float64(m.factor.jitter_applied))
        f.write_chunk(prefix + '/noise', numpy.float64(m.noise_variance))
        f.write_chunk(prefix + '/y_mean', numpy.float64(m.y_mean))
    elif isinstance(m, svr.SvrModel):
        f.write_chunk(prefix + '/x_support', m.x_support)
        f.write_chunk(prefix + '/dual_coef', m.dual_coef)
        f.write_chunk(prefix + '/bias', numpy.float64(m.bias))
        f.write_chunk(prefix + '/epsilon', numpy.float64(m.epsilon))
        f.write_chunk(prefix + '/c', numpy.float64(m.c))
        f.write_chunk(prefix + '/converged', numpy.bool_(m.converged))
        f.write_chunk(prefix + '/n_iter', numpy.int64(m.n_iter))
        f.write_chunk(prefix + '/objective', numpy.float64(m.objective))
    else:
        f.write_chunk(prefix + '/x_train', m.x_train)
        f.write_chunk(prefix + '/alpha', m.alpha)
        f.write_chunk(prefix + '/bias', numpy.float64(m.bias))
        f.write_chunk(prefix + '/lam', numpy.float64(m.lam))


def _read_model(f, prefix, model):
    kernel = kernels.parse_kernel(f.read_text(prefix + '/kernel'))
    if model == 'gpr':
        factor = CholeskyFactor(l=f.read_chunk(prefix + '/l'),
                                jitter_applied=f.read_scalar(prefix
                                                             + '/jitter'))
        return gpr.GprModel(x_train=f.read_chunk(prefix + '/x_train'),
                            alpha=f.read_chunk(prefix + '/alpha'),
                            factor=factor,
                            kernel=kernel,
                            noise_variance=f.read_scalar(prefix + '/noise'),
                            y_mean=f.read_scalar(prefix + '/y_mean'))
    if model == 'svr':
        return svr.SvrModel(x_support=f.read_chunk(prefix + '/x_support'),
                            dual_coef=f.read_chunk(prefix + '/dual_coef'),
                            bias=f.read_scalar(prefix + '/bias'),
                            kernel=kernel,
                            epsilon=f.read_scalar(prefix + '/epsilon'),
                            c=f.read_scalar(prefix + '/c'),
                            converged=bool(f.read_scalar(prefix
                                                         + '/converged')),
                            n_iter=int(f.read_scalar(prefix + '/n_iter')),
                            objective=f.read_scalar(prefix + '/objective'))
    return krr.KrrModel(x_train=f.read_chunk(prefix + '/x_train'),
                        alpha=f.read_chunk(prefix + '/alpha'),
                        bias=f.read_scalar(prefix + '/bias'),
                        kernel=kernel,
                        lam=f.read_scalar(prefix + '/lam'))
