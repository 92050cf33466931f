# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Run configuration.

A `RunConfig` holds every option of the train, predict and benchmark
commands. Configuration files are flat ``key = value`` text::

    # GPR with a small grid search
    model = gpr
    kernel = matern32(ls=1, var=1) + white(var=0.01)
    ls_grid = 0.5, 1, 2
    eof_k = 5

``#`` starts a comment and blank lines are ignored. List values are comma
separated, except ``cv_kernels`` which separates kernels with ``;``.
Command line flags override file values.
"""

import logging
import math

from . import kernels
from .data import FEATURE_MODES, OUTPUT_VARIABLES

logger = logging.getLogger('kremu.config')

MODELS = ('gpr', 'svr', 'krr')


class ConfigError(ValueError):
    """Invalid configuration key or value."""


def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _bool(text):
    value = text.strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: ' + repr(text))


def _str(text):
    return text.strip()


def _floats(text):
    return [float(item) for item in text.split(',') if item.strip()]


def _names(text):
    return [item.strip() for item in text.split(',') if item.strip()]


def _kernels(text):
    return [kernels.parse_kernel(item) for item in text.split(';')
            if item.strip()]


def _format(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, kernels.Kernel):
        return kernels.print_kernel(value)
    if isinstance(value, list):
        if value and isinstance(value[0], kernels.Kernel):
            return '; '.join(kernels.print_kernel(k) for k in value)
        return ', '.join(_format(v) for v in value)
    return str(value)


# key: (parser, default)
OPTIONS = {
    'model': (_str, 'gpr'),
    'models': (_names, ['gpr', 'svr', 'krr']),
    'kernel': (kernels.parse_kernel, kernels.Matern32()),
    'noise': (_float, 1e-4),
    'ls_grid': (_floats, []),
    'var_grid': (_floats, []),
    'noise_grid': (_floats, []),
    'lam': (_float, 1e-4),
    'cv': (_bool, False),
    'lambdas': (_floats, [1e-6, 1e-4, 1e-2, 1.0, 100.0]),
    'cv_kernels': (_kernels, []),
    'folds': (_int, 5),
    'epsilon': (_float, 0.05),
    'c': (_float, 10.0),
    'tol': (_float, 1e-3),
    'max_iter': (_int, 100000),
    'eof_k': (_int, 5),
    'feature_mode': (_str, 'global_mean'),
    'feature_k': (_int, 2),
    'variables': (_names, list(OUTPUT_VARIABLES)),
    'standardize_targets': (_bool, True),
    'area_weighted': (_bool, True),
    'seed': (_int, 0),
    'jobs': (_int, 1),
}


class RunConfig(object):
    """Options of a training or benchmark run.

    Every key of `OPTIONS` is an attribute. Construct with keyword overrides,
    or read a file with `from_file`.

    Args:
        kwargs: Option values. Strings are parsed as in config files.

    Raises:
        ConfigError: Unknown key or invalid value.
    """

    def __init__(self, **kwargs):
        for key, (_, default) in OPTIONS.items():
            setattr(self, key, list(default) if isinstance(default, list)
                    else default)
        self.update(**kwargs)

    def update(self, **kwargs):
        """Override options. Values that are None are ignored."""
        for key, value in kwargs.items():
            if key not in OPTIONS:
                raise ConfigError('unknown configuration key ' + repr(key))
            if value is None:
                continue
            if isinstance(value, str):
                value = self._parse(key, value)
            setattr(self, key, value)
        self.validate()
        return self

    def copy(self, **kwargs):
        """Return a copy with the given options overridden."""
        new = RunConfig()
        for key in OPTIONS:
            value = getattr(self, key)
            setattr(new, key,
                    list(value) if isinstance(value, list) else value)
        return new.update(**kwargs)

    @staticmethod
    def _parse(key, text):
        parser = OPTIONS[key][0]
        try:
            return parser(text)
        except ValueError as error:
            raise ConfigError('invalid value for ' + key + ': '
                              + str(error)) from error

    @classmethod
    def from_text(cls, text):
        """Parse ``key = value`` text.

        Raises:
            ConfigError: A line is malformed, a key is unknown or a value is
                invalid.
        """
        values = {}
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError('line ' + str(number)
                                  + ': expected key = value')
            key, value = line.split('=', 1)
            key = key.strip()
            if key not in OPTIONS:
                raise ConfigError('line ' + str(number)
                                  + ': unknown configuration key '
                                  + repr(key))
            values[key] = cls._parse(key, value)
        return cls(**values)

    @classmethod
    def from_file(cls, path):
        """Read a configuration file."""
        logger.info('reading configuration: ' + str(path))
        with open(path, 'r') as f:
            return cls.from_text(f.read())

    def to_text(self):
        """Canonical ``key = value`` text, keys sorted."""
        return ''.join(key + ' = ' + _format(getattr(self, key)) + '\n'
                       for key in sorted(OPTIONS))

    def validate(self):
        """Check value ranges.

        Raises:
            ConfigError: A value is out of range.
        """

        def check(condition, message):
            if not condition:
                raise ConfigError(message)

        check(self.model in MODELS,
              'model must be one of ' + ', '.join(MODELS))
        check(self.models and all(m in MODELS for m in self.models),
              'models must be a non-empty list of ' + ', '.join(MODELS))
        check(isinstance(self.kernel, kernels.Kernel), 'kernel is required')
        check(math.isfinite(self.noise) and self.noise >= 0,
              'noise must be >= 0')
        check(all(v > 0 for v in self.ls_grid), 'ls_grid entries must be > 0')
        check(all(v >= 0 for v in self.var_grid),
              'var_grid entries must be >= 0')
        check(all(v >= 0 for v in self.noise_grid),
              'noise_grid entries must be >= 0')
        check(self.lam > 0, 'lam must be > 0')
        check(self.lambdas and all(v > 0 for v in self.lambdas),
              'lambdas must be a non-empty list of values > 0')
        check(self.folds >= 2, 'folds must be >= 2')
        check(self.epsilon >= 0, 'epsilon must be >= 0')
        check(self.c > 0, 'c must be > 0')
        check(self.tol > 0, 'tol must be > 0')
        check(self.max_iter >= 1, 'max_iter must be >= 1')
        check(self.eof_k >= 1, 'eof_k must be >= 1')
        check(self.feature_mode in FEATURE_MODES,
              'feature_mode must be one of ' + ', '.join(FEATURE_MODES))
        check(self.feature_k >= 1, 'feature_k must be >= 1')
        check(self.variables
              and all(v in OUTPUT_VARIABLES for v in self.variables),
              'variables must be a non-empty list of '
              + ', '.join(OUTPUT_VARIABLES))
        check(self.jobs >= 1, 'jobs must be >= 1')

    def __eq__(self, other):
        return (isinstance(other, RunConfig)
                and self.to_text() == other.to_text())

    __hash__ = None

    def __repr__(self):
        return 'RunConfig(' + ', '.join(
            key + '=' + repr(getattr(self, key)) for key in sorted(OPTIONS)) \
            + ')'
