# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Scenario datasets, regression features and synthetic scenarios.

A `ScenarioDataset` holds one emission scenario on a regular latitude x
longitude grid: the yearly forcings (global ``co2`` and ``ch4`` scalars,
``so2`` and ``bc`` fields) and optionally the yearly output fields ``tas``,
``dtr``, ``pr`` and ``pr90``. Datasets are stored in CBX files, see
:py:mod:`kremu.cbx`.

`FeatureBuilder` turns the forcings into one feature row per year.
`synth_scenarios` generates seeded desk-scale scenarios whose outputs follow
the closed-form response `ground_truth`.
"""

import io
import logging
import math

import numpy

from . import reduce

logger = logging.getLogger('kremu.data')

OUTPUT_VARIABLES = ('tas', 'dtr', 'pr', 'pr90')
INPUT_FIELDS = ('so2', 'bc')
FEATURE_MODES = ('global_mean', 'eof_k')


class EmptyDataset(ValueError):
    """A dataset or dataset list contains no years."""


class InvalidDimensions(ValueError):
    """Dataset arrays or generator counts have invalid sizes."""


class MissingVariable(ValueError):
    """A required output variable is absent from a dataset."""


class GridMismatch(ValueError):
    """Two datasets or a dataset and a model use different grids."""


def check_same_grid(a, b):
    """Raise `GridMismatch` unless datasets *a* and *b* share their grid."""
    if a.grid_shape != b.grid_shape or not numpy.array_equal(a.lat, b.lat):
        raise GridMismatch('grid of ' + str(a.name) + ' ' + str(a.grid_shape)
                           + ' differs from grid of ' + str(b.name) + ' '
                           + str(b.grid_shape))


class ScenarioDataset(object):
    """One scenario on a regular grid.

    Instances read from files always store arrays as C-contiguous
    `numpy.ndarray` objects. User created datasets may provide any array_like
    input; call `validate` to convert it.

    Attributes:
        name (str): Scenario name.
        years ((*Y*,) `numpy.ndarray` of ``numpy.int32``): Strictly increasing
            years.
        lat ((*L*,) `numpy.ndarray` of ``numpy.float64``): Strictly increasing
            latitudes of the grid rows in degrees, within [-90, 90].
        n_lon (int): Number of grid columns. Column *j* is centred at
            longitude ``(j + 0.5) * 360 / n_lon``.
        co2 ((*Y*,) `numpy.ndarray`): Cumulative CO2 emissions.
        ch4 ((*Y*,) `numpy.ndarray`): Global CH4 forcing.
        so2 ((*Y*, *L*, *n_lon*) `numpy.ndarray`): SO2 emission fields.
        bc ((*Y*, *L*, *n_lon*) `numpy.ndarray`): Black carbon emission fields.
        outputs (dict[str, `numpy.ndarray`]): Output fields of shape
            (*Y*, *L*, *n_lon*) keyed by variable name. Absent variables are
            not in the dict.
    """

    def __init__(self, name, years, lat, n_lon, co2, ch4, so2, bc,
                 outputs=None):
        self.name = name
        self.years = years
        self.lat = lat
        self.n_lon = n_lon
        self.co2 = co2
        self.ch4 = ch4
        self.so2 = so2
        self.bc = bc
        self.outputs = dict(outputs) if outputs else {}

    @property
    def n_years(self):
        """int: Number of years."""
        return len(self.years)

    @property
    def n_lat(self):
        """int: Number of grid rows."""
        return len(self.lat)

    @property
    def grid_shape(self):
        """tuple[int, int]: ``(n_lat, n_lon)``."""
        return (self.n_lat, self.n_lon)

    @property
    def lon(self):
        """(*n_lon*,) `numpy.ndarray`: Longitudes of the grid columns."""
        return (numpy.arange(self.n_lon) + 0.5) * 360.0 / self.n_lon

    @property
    def area_weights(self):
        """(*L*, *n_lon*) `numpy.ndarray`: ``cos(lat)`` per grid cell."""
        w = numpy.cos(numpy.radians(self.lat))
        return numpy.repeat(w[:, None], self.n_lon, axis=1)

    @property
    def variables(self):
        """list[str]: Output variables present, in file order."""
        return [v for v in OUTPUT_VARIABLES if v in self.outputs]

    @property
    def output_mask(self):
        """int: Bit *i* set when `OUTPUT_VARIABLES` [*i*] is present."""
        return sum(1 << i for i, v in enumerate(OUTPUT_VARIABLES)
                   if v in self.outputs)

    def validate(self):
        """Validate all attributes.

        Convert every array attribute to a C-contiguous `numpy.ndarray` of the
        proper type and check shapes and invariants.

        Raises:
            InvalidDimensions: An attribute has the wrong size or violates an
                invariant.
        """
        logger.debug('Validating ScenarioDataset ' + str(self.name))

        self.years = numpy.ascontiguousarray(self.years, dtype=numpy.int32)
        self.lat = numpy.ascontiguousarray(self.lat, dtype=numpy.float64)
        self.n_lon = int(self.n_lon)
        if self.years.ndim != 1 or self.lat.ndim != 1:
            raise InvalidDimensions('years and lat must be 1-dimensional')
        if self.n_lat < 1 or self.n_lon < 1:
            raise InvalidDimensions('grid must have at least one cell, got '
                                    + str(self.grid_shape))
        if numpy.any(numpy.diff(self.years) <= 0):
            raise InvalidDimensions('years must be strictly increasing')
        if numpy.any(numpy.diff(self.lat) <= 0):
            raise InvalidDimensions('latitudes must be strictly increasing')
        if numpy.any(numpy.abs(self.lat) > 90):
            raise InvalidDimensions('latitudes must be within [-90, 90]')

        field_shape = (self.n_years, ) + self.grid_shape
        self.co2 = self._array(self.co2, (self.n_years, ), 'co2')
        self.ch4 = self._array(self.ch4, (self.n_years, ), 'ch4')
        self.so2 = self._array(self.so2, field_shape, 'so2')
        self.bc = self._array(self.bc, field_shape, 'bc')
        for variable in list(self.outputs):
            if variable not in OUTPUT_VARIABLES:
                raise InvalidDimensions('unknown output variable '
                                        + repr(variable))
            self.outputs[variable] = self._array(self.outputs[variable],
                                                 field_shape, variable)

    @staticmethod
    def _array(value, shape, name):
        a = numpy.ascontiguousarray(value, dtype=numpy.float64)
        if a.size != int(numpy.prod(shape)):
            raise InvalidDimensions(name + ' has ' + str(a.size)
                                    + ' values, expected shape ' + str(shape))
        a = a.reshape(shape)
        if not numpy.all(numpy.isfinite(a)):
            raise InvalidDimensions(name + ' contains NaN or Inf')
        return a

    def year_index(self, year):
        """Return the index of *year*, raising `KeyError` if absent."""
        idx = numpy.searchsorted(self.years, year)
        if idx >= self.n_years or self.years[idx] != year:
            raise KeyError('year ' + str(year) + ' not in dataset '
                           + str(self.name))
        return int(idx)

    def field(self, variable, year):
        """Return the (*L*, *n_lon*) field of an input or output variable.

        Raises:
            KeyError: The variable or year is not present.
        """
        if variable in INPUT_FIELDS:
            fields = getattr(self, variable)
        elif variable in self.outputs:
            fields = self.outputs[variable]
        else:
            raise KeyError('variable ' + repr(variable) + ' not in dataset '
                           + str(self.name))
        return fields[self.year_index(year)]

    def with_outputs(self, outputs, name=None):
        """Return a dataset sharing the inputs with new output fields."""
        d = ScenarioDataset(name=self.name if name is None else name,
                            years=self.years,
                            lat=self.lat,
                            n_lon=self.n_lon,
                            co2=self.co2,
                            ch4=self.ch4,
                            so2=self.so2,
                            bc=self.bc,
                            outputs=outputs)
        d.validate()
        return d

    def __eq__(self, other):
        if not isinstance(other, ScenarioDataset):
            return NotImplemented
        return (self.grid_shape == other.grid_shape
                and numpy.array_equal(self.years, other.years)
                and numpy.array_equal(self.lat, other.lat)
                and numpy.array_equal(self.co2, other.co2)
                and numpy.array_equal(self.ch4, other.ch4)
                and numpy.array_equal(self.so2, other.so2)
                and numpy.array_equal(self.bc, other.bc)
                and self.variables == other.variables
                and all(numpy.array_equal(self.outputs[v], other.outputs[v])
                        for v in self.variables))

    __hash__ = None

    def __repr__(self):
        return ('ScenarioDataset(name=' + repr(self.name) + ', years='
                + str(self.n_years) + ', grid=' + str(self.grid_shape)
                + ', outputs=' + str(self.variables) + ')')


def area_mean(fields, lat):
    """Area-weighted (``cos(lat)``) mean of fields over the last two axes."""
    w = numpy.cos(numpy.radians(lat))[:, None]
    w = numpy.broadcast_to(w, fields.shape[-2:])
    return numpy.sum(fields * w, axis=(-2, -1)) / numpy.sum(w)


class FeatureTable(object):
    """Regression inputs, one row per year.

    Attributes:
        x ((*Y*, *F*) `numpy.ndarray`): Feature matrix.
        feature_names (list[str]): Column names.
        years ((*Y*,) `numpy.ndarray`): Year of each row.
    """

    def __init__(self, x, feature_names, years):
        self.x = x
        self.feature_names = list(feature_names)
        self.years = years

    def to_csv(self):
        """Return the table as CSV text with a header row."""
        out = io.StringIO(newline='')
        out.write(','.join(['year'] + self.feature_names) + '\n')
        for year, row in zip(self.years, self.x):
            out.write(','.join([str(int(year))]
                               + ['%.17g' % value for value in row]) + '\n')
        return out.getvalue()

    def write_csv(self, path):
        """Write `to_csv` output to *path*."""
        with open(path, 'w', newline='') as f:
            f.write(self.to_csv())


class FeatureBuilder(object):
    """Frozen featurization of scenario forcings.

    Each row is ``[co2, ch4]`` followed by the aerosol summaries:

    * ``global_mean``: area-weighted means of so2 and bc (4 features).
    * ``eof_k``: the first *k* EOF coefficients of so2, then of bc
      (``2 + 2 k`` features). The aerosol bases are fitted on the training
      years.

    Every column is standardized with the mean and standard deviation of the
    training rows. Columns that are constant over the training rows map to 0.

    Args:
        mode (str): ``'global_mean'`` or ``'eof_k'``.
        k (int): Aerosol EOF count in ``eof_k`` mode.
    """

    def __init__(self, mode='global_mean', k=2):
        if mode not in FEATURE_MODES:
            raise ValueError('feature mode must be one of '
                             + ', '.join(FEATURE_MODES) + ', got '
                             + repr(mode))
        self.mode = mode
        self.k = int(k)
        self.bases = {}
        self.mean = None
        self.scale = None

    @property
    def feature_names(self):
        """list[str]: Column names."""
        if self.mode == 'global_mean':
            return ['co2', 'ch4', 'so2_mean', 'bc_mean']
        return ['co2', 'ch4'] + [
            field + '_eof' + str(i) for field in INPUT_FIELDS
            for i in range(self.k)
        ]

    def _raw(self, d):
        columns = [d.co2[:, None], d.ch4[:, None]]
        for field in INPUT_FIELDS:
            values = getattr(d, field)
            if self.mode == 'global_mean':
                columns.append(area_mean(values, d.lat)[:, None])
            else:
                columns.append(
                    reduce.project(self.bases[field],
                                   values.reshape(d.n_years, -1)))
        return numpy.hstack(columns)

    def fit(self, datasets):
        """Fit aerosol bases and standardization on training datasets.

        Args:
            datasets (list[`ScenarioDataset`]): Training scenarios. Their years
                are pooled.

        Returns:
            `FeatureBuilder`: self

        Raises:
            EmptyDataset: There are no training years.
        """
        datasets = list(datasets)
        if sum(d.n_years for d in datasets) == 0:
            raise EmptyDataset('cannot build features from zero years')

        if self.mode == 'eof_k':
            for field in INPUT_FIELDS:
                pooled = numpy.vstack([
                    getattr(d, field).reshape(d.n_years, -1) for d in datasets
                ])
                self.bases[field] = reduce.fit(pooled, self.k)

        raw = numpy.vstack([self._raw(d) for d in datasets])
        self.mean = numpy.mean(raw, axis=0)
        std = numpy.std(raw, axis=0)
        constant = std <= 1e-12 * numpy.maximum(1.0, numpy.abs(self.mean))
        self.scale = numpy.where(constant, 0.0, 1.0 / numpy.where(constant,
                                                                  1.0, std))
        logger.debug('feature standardization fitted on '
                     + str(raw.shape[0]) + ' rows')
        return self

    def transform(self, d):
        """Return the `FeatureTable` of dataset *d*.

        Raises:
            EmptyDataset: *d* has no years.
        """
        if self.mean is None:
            raise RuntimeError('FeatureBuilder is not fitted')
        if d.n_years == 0:
            raise EmptyDataset('dataset ' + str(d.name) + ' has no years')
        x = (self._raw(d) - self.mean) * self.scale
        return FeatureTable(numpy.ascontiguousarray(x), self.feature_names,
                            d.years.copy())


def build_features(d, so2_bc_mode='global_mean', k=2):
    """Features of one dataset standardized over its own years.

    Args:
        d (`ScenarioDataset`): Dataset with inputs.
        so2_bc_mode (str): ``'global_mean'`` or ``'eof_k'``.
        k (int): Aerosol EOF count in ``eof_k`` mode.

    Returns:
        `FeatureTable`: The features.

    Raises:
        EmptyDataset: *d* has no years.
    """
    return FeatureBuilder(so2_bc_mode, k).fit([d]).transform(d)


# Synthetic scenarios

_STRIDES = (1, 2, 5, 10, 25, 50)


def synthetic_years(n_years, end_year=2100, stride=None):
    """Years of a synthetic scenario.

    Years end at *end_year*. When *stride* is None the smallest divisor of 50
    whose span reaches back at least 55 years is used (1 when none does), so
    the default lead-time windows are populated.
    """
    if stride is None:
        stride = next((s for s in _STRIDES if s * (n_years - 1) >= 55), 1)
    return end_year - stride * numpy.arange(n_years - 1, -1, -1)


def ground_truth(co2, ch4, so2, bc, lat, linear=False):
    """Noiseless response of the synthetic climate.

    With ``phi`` the latitude of a grid row::

        tas  = co2 (1 + 0.8 sin(phi)**2) + m(ch4) - (0.8 so2 + 0.2 bc)
        dtr  = 0.2 - 0.15 tas + 0.05 tas cos(phi)
        pr   = 1.3 tas + 0.3 tas**2 (1 + sin(phi)**2) + 0.05 sin(5 tas)
        pr90 = 1.2 pr + 0.15 tas**2

    where ``m(c) = c / (c + 0.5)`` and ``m(c) = c`` in linear mode.

    Args:
        co2 ((*Y*,) array_like): CO2 per year.
        ch4 ((*Y*,) array_like): CH4 per year.
        so2 ((*Y*, *L*, *W*) array_like): SO2 fields.
        bc ((*Y*, *L*, *W*) array_like): Black carbon fields.
        lat ((*L*,) array_like): Latitudes in degrees.
        linear (bool): Use the linear methane response.

    Returns:
        dict[str, `numpy.ndarray`]: Fields keyed by output variable.
    """
    return _respond(numpy.asarray(co2, dtype=numpy.float64),
                    numpy.asarray(ch4, dtype=numpy.float64),
                    numpy.asarray(so2, dtype=numpy.float64),
                    numpy.asarray(bc, dtype=numpy.float64),
                    numpy.asarray(lat, dtype=numpy.float64), linear)


def _respond(co2, ch4, so2, bc, lat, linear, tas_noise=None, pr_noise=None):
    phi = numpy.radians(lat)[None, :, None]
    sin2 = numpy.sin(phi)**2
    methane = ch4 if linear else ch4 / (ch4 + 0.5)

    tas = (co2[:, None, None] * (1.0 + 0.8 * sin2) + methane[:, None, None]
           - (0.8 * so2 + 0.2 * bc))
    if tas_noise is not None:
        tas = tas + tas_noise
    dtr = 0.2 - 0.15 * tas + 0.05 * tas * numpy.cos(phi)
    pr = (1.3 * tas + 0.3 * tas**2 * (1.0 + sin2)
          + 0.05 * numpy.sin(5.0 * tas))
    if pr_noise is not None:
        pr = pr + pr_noise
    pr90 = 1.2 * pr + 0.15 * tas**2
    shape = so2.shape
    return {
        'tas': numpy.ascontiguousarray(numpy.broadcast_to(tas, shape)),
        'dtr': numpy.ascontiguousarray(numpy.broadcast_to(dtr, shape)),
        'pr': numpy.ascontiguousarray(numpy.broadcast_to(pr, shape)),
        'pr90': numpy.ascontiguousarray(numpy.broadcast_to(pr90, shape)),
    }


def _bump(lat, lon, centre_lat, centre_lon, width):
    """Gaussian bump on the grid, periodic in longitude."""
    dlat = lat[:, None] - centre_lat
    dlon = (lon[None, :] - centre_lon + 180.0) % 360.0 - 180.0
    return numpy.exp(-(dlat**2 + dlon**2) / (2.0 * width**2))


def _draw_pattern(rng, lat, lon):
    return _bump(lat, lon, rng.uniform(-30.0, 60.0), rng.uniform(0.0, 360.0),
                 rng.uniform(20.0, 40.0))


def _smooth_noise(rng, shape):
    """Spatially smooth noise with unit standard deviation per field."""
    z = rng.standard_normal(shape)
    for _ in range(2):
        padded = numpy.concatenate([z[:, :1], z, z[:, -1:]], axis=1)
        z = (z + numpy.roll(z, 1, axis=2) + numpy.roll(z, -1, axis=2)
             + padded[:, :-2] + padded[:, 2:]) / 5.0
    std = numpy.std(z, axis=(1, 2), keepdims=True)
    return numpy.where(std > 0, z / numpy.where(std > 0, std, 1.0), z)


def _draw_forcings(rng, s, n_scenarios, t, lat, lon, shared):
    """Forcing paths of one synthetic scenario."""
    rate = 0.4 + 0.8 * (s + rng.uniform(0.1, 0.9)) / n_scenarios
    curvature = rng.uniform(0.0, 0.5)
    co2 = rate * (t + curvature * t**2)

    height = rng.uniform(0.2, 0.6)
    ch4_tau = rng.uniform(0.15, 0.4)
    ch4 = height * (1.0 - numpy.exp(-t / ch4_tau))

    if shared is None:
        so2_pattern = _draw_pattern(rng, lat, lon)
        bc_pattern = _draw_pattern(rng, lat, lon)
    else:
        so2_pattern, bc_pattern = shared
    so2_amp = rng.uniform(0.3, 0.8) * numpy.exp(-t / rng.uniform(0.2, 0.5))
    bc_amp = rng.uniform(0.1, 0.3) * numpy.exp(-t / rng.uniform(0.2, 0.5))
    so2 = so2_amp[:, None, None] * so2_pattern[None]
    bc = bc_amp[:, None, None] * bc_pattern[None]
    return co2, ch4, so2, bc


def _mix_forcings(rng, forcings):
    """Convex combination of forcing paths with weights bounded away from 0."""
    weights = rng.uniform(0.5, 1.5, size=len(forcings))
    weights /= numpy.sum(weights)
    return tuple(
        sum(w * f[i] for w, f in zip(weights, forcings)) for i in range(4))


def synth_scenarios(seed,
                    n_scenarios=4,
                    n_years=86,
                    n_lat=8,
                    n_lon=16,
                    noise=0.1,
                    linear=False,
                    end_year=2100,
                    stride=None):
    """Generate seeded synthetic scenarios.

    Each scenario draws its forcing paths over the normalized time
    ``t in [0, 1]`` spanning its years:

    * co2: monotone ramp ``r (t + a t**2)`` with a distinct rate ``r`` per
      scenario.
    * ch4: plateauing curve ``h (1 - exp(-t / tau))``.
    * so2, bc: Gaussian bumps with amplitudes decaying as ``exp(-t / tau)``.

    With three or more scenarios the forcings of the last one are a convex
    combination of the others', with every weight at least
    ``1 / (3 (n_scenarios - 1))``. Each of its yearly forcing vectors lies
    strictly inside the hull of the other scenarios' vectors for the same
    year, so it can be held out as a test scenario without extrapolation.

    Outputs follow `ground_truth` plus spatially smooth noise of standard
    deviation *noise* on tas and an independent ``1.5 * noise`` term on pr.
    In *linear* mode the aerosol patterns are shared by all scenarios and
    methane enters linearly, so tas is linear in the global-mean features.

    Args:
        seed (int): Random seed.
        n_scenarios (int): Number of scenarios.
        n_years (int): Years per scenario.
        n_lat (int): Grid rows.
        n_lon (int): Grid columns.
        noise (float): Noise standard deviation on tas, ``>= 0``.
        linear (bool): Linear response mode.
        end_year (int): Last year.
        stride (int): Year spacing, see `synthetic_years`.

    Returns:
        list[`ScenarioDataset`]: Scenarios named ``scenario0``,
        ``scenario1``, ...

    Raises:
        InvalidDimensions: A count is smaller than 1 or *noise* is negative.
    """
    for name, value in (('n_scenarios', n_scenarios), ('n_years', n_years),
                        ('n_lat', n_lat), ('n_lon', n_lon)):
        if int(value) < 1:
            raise InvalidDimensions(name + ' must be >= 1, got ' + str(value))
    if not (math.isfinite(noise) and noise >= 0):
        raise InvalidDimensions('noise must be >= 0, got ' + str(noise))

    rng = numpy.random.default_rng(seed)
    years = synthetic_years(n_years, end_year, stride)
    t = (years - years[0]) / max(years[-1] - years[0], 1)
    lat = -90.0 + (numpy.arange(n_lat) + 0.5) * 180.0 / n_lat
    lon = (numpy.arange(n_lon) + 0.5) * 360.0 / n_lon

    shared = None
    if linear:
        shared = (_draw_pattern(rng, lat, lon), _draw_pattern(rng, lat, lon))

    n_drawn = n_scenarios - 1 if n_scenarios >= 3 else n_scenarios
    drawn = []
    scenarios = []
    for s in range(n_scenarios):
        if s < n_drawn:
            co2, ch4, so2, bc = _draw_forcings(rng, s, n_drawn, t, lat, lon,
                                               shared)
            drawn.append((co2, ch4, so2, bc))
        else:
            co2, ch4, so2, bc = _mix_forcings(rng, drawn)

        tas_noise = None
        pr_noise = None
        if noise > 0:
            shape = (n_years, n_lat, n_lon)
            tas_noise = noise * _smooth_noise(rng, shape)
            pr_noise = 1.5 * noise * _smooth_noise(rng, shape)

        outputs = _respond(co2, ch4, so2, bc, lat, linear, tas_noise, pr_noise)
        d = ScenarioDataset(name='scenario' + str(s),
                            years=years,
                            lat=lat,
                            n_lon=n_lon,
                            co2=co2,
                            ch4=ch4,
                            so2=so2,
                            bc=bc,
                            outputs=outputs)
        d.validate()
        scenarios.append(d)

    logger.info('generated ' + str(n_scenarios) + ' synthetic scenarios ('
                + str(n_years) + ' years, grid ' + str(n_lat) + 'x'
                + str(n_lon) + ', seed ' + str(seed) + ')')
    return scenarios
