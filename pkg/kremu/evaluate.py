# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Lead-time window evaluation and the regressor benchmark.

* `rmse_window` - Error of a predicted scenario over a window of years.
* `default_windows` - The six standard lead-time windows.
* `evaluate` - Table of `rmse_window` values for one prediction.
* `run_benchmark` - Train each regressor and evaluate it on a test scenario.

Fields are first averaged over the years of the window, then compared with
a latitude weighted root mean square::

    rmse = sqrt(sum_g w_g (p_g - t_g)**2 / sum_g w_g),  w_g = cos(lat_g)

With ``area_weighted=False`` all weights are 1.
"""

import io
import logging
import math
from collections import namedtuple

import numpy

from .data import GridMismatch, MissingVariable, check_same_grid
from .emulator import Emulator

logger = logging.getLogger('kremu.evaluate')

# re-exported for callers that handle evaluation errors
__all__ = [
    'LeadTimeWindow', 'EvalReport', 'WindowNotCovered', 'MissingVariable',
    'GridMismatch', 'default_windows', 'parse_windows', 'rmse_window',
    'evaluate', 'run_benchmark', 'check_ranking', 'REFERENCE_TAS_RMSE'
]


class WindowNotCovered(ValueError):
    """A dataset does not contain the years of a window."""


class LeadTimeWindow(namedtuple('LeadTimeWindow',
                                'label year_start year_end')):
    """Inclusive range of years.

    Attributes:
        label (str): Column label.
        year_start (int): First year.
        year_end (int): Last year, ``>= year_start``.
    """

    __slots__ = ()

    def __new__(cls, label, year_start, year_end):
        if year_end < year_start:
            raise ValueError('window ' + str(label) + ' ends before it starts')
        return super().__new__(cls, str(label), int(year_start),
                               int(year_end))

    @property
    def n_years(self):
        """int: Number of years in the window."""
        return self.year_end - self.year_start + 1


def default_windows():
    """The six lead-time windows: two single years, three ranges and the
    final 20 years."""
    return [
        LeadTimeWindow('2050', 2050, 2050),
        LeadTimeWindow('2100', 2100, 2100),
        LeadTimeWindow('2045-2055', 2045, 2055),
        LeadTimeWindow('2090-2100', 2090, 2100),
        LeadTimeWindow('2050-2100', 2050, 2100),
        LeadTimeWindow('20Y average', 2081, 2100),
    ]


def parse_windows(text):
    """Parse a window list.

    Args:
        text (str): ``default`` or comma separated items ``YEAR``,
            ``START-END`` or ``LABEL=START-END``.

    Returns:
        list[`LeadTimeWindow`]
    """
    if text.strip() == 'default':
        return default_windows()
    windows = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        label, _, span = item.rpartition('=')
        span = span.strip()
        start, _, end = span.partition('-')
        try:
            year_start = int(start)
            year_end = int(end) if end else year_start
        except ValueError:
            raise ValueError('invalid window ' + repr(item)) from None
        windows.append(
            LeadTimeWindow(label.strip() or span, year_start, year_end))
    if not windows:
        raise ValueError('empty window list')
    return windows


def _window_mean(d, variable, years):
    indices = [d.year_index(year) for year in years]
    return numpy.mean(d.outputs[variable][indices], axis=0)


def rmse_window(pred, truth, variable, window, area_weighted=True):
    """Root mean square error over a lead-time window.

    A window is covered by *truth* when it lies within the truth years and
    contains at least one of them; *pred* must contain every truth year inside
    the window.

    Args:
        pred (`kremu.data.ScenarioDataset`): Predicted outputs.
        truth (`kremu.data.ScenarioDataset`): Reference outputs.
        variable (str): Output variable.
        window (`LeadTimeWindow`): Years to average.
        area_weighted (bool): Weight grid cells by ``cos(lat)``.

    Returns:
        float: The error, ``>= 0``.

    Raises:
        MissingVariable: *variable* is absent from *pred* or *truth*.
        GridMismatch: The datasets use different grids.
        WindowNotCovered: The window years are not available.
    """
    for d in (pred, truth):
        if variable not in d.outputs:
            raise MissingVariable('dataset ' + str(d.name) + ' has no '
                                  + str(variable))
    check_same_grid(pred, truth)

    years = [
        int(y) for y in truth.years
        if window.year_start <= y <= window.year_end
    ]
    if (not years or window.year_start < truth.years[0]
            or window.year_end > truth.years[-1]):
        raise WindowNotCovered('window ' + window.label
                               + ' is not covered by ' + str(truth.name))
    missing = set(years) - set(int(y) for y in pred.years)
    if missing:
        raise WindowNotCovered('window ' + window.label + ': '
                               + str(pred.name) + ' lacks years '
                               + str(sorted(missing)))

    diff = _window_mean(pred, variable, years) - _window_mean(
        truth, variable, years)
    if area_weighted:
        w = truth.area_weights
    else:
        w = numpy.ones(truth.grid_shape)
    return math.sqrt(float(numpy.sum(w * diff * diff) / numpy.sum(w)))


class EvalReport(object):
    """RMSE per model, variable and window.

    Args:
        dataset (str): Name of the evaluated scenario.
        windows (list[`LeadTimeWindow`]): Table columns in order.
        area_weighted (bool): Weighting used.

    Attributes:
        rmse (dict): ``(model, variable, window label)`` to RMSE.
    """

    def __init__(self, dataset, windows, area_weighted=True):
        self.dataset = dataset
        self.windows = list(windows)
        self.area_weighted = area_weighted
        self.models = []
        self.variables = []
        self.rmse = {}

    def add(self, model, variable, window, value):
        """Record one cell."""
        if model not in self.models:
            self.models.append(model)
        if variable not in self.variables:
            self.variables.append(variable)
        self.rmse[(model, variable, window.label)] = float(value)

    def get(self, model, variable, label):
        """Return one cell."""
        return self.rmse[(model, variable, label)]

    def cells(self):
        """Yield ``(model, variable, label, rmse)`` in table order."""
        for variable in self.variables:
            for model in self.models:
                for w in self.windows:
                    yield model, variable, w.label, self.get(
                        model, variable, w.label)

    def to_table(self):
        """Aligned text table, one block per variable."""
        width = max([12] + [len(w.label) + 2 for w in self.windows])
        lines = []
        for variable in self.variables:
            lines.append(variable.ljust(8) + ''.join(
                w.label.rjust(width) for w in self.windows))
            for model in self.models:
                lines.append(model.upper().ljust(8) + ''.join(
                    ('%.4f' % self.get(model, variable, w.label)).rjust(width)
                    for w in self.windows))
            lines.append('')
        weighting = 'area weighted' if self.area_weighted else 'unweighted'
        lines.append('RMSE on ' + str(self.dataset) + ' (' + weighting + ')')
        return '\n'.join(lines) + '\n'

    def to_csv(self):
        """CSV text: ``variable,model`` then one column per window."""
        out = io.StringIO(newline='')
        out.write('# dataset = ' + str(self.dataset) + '\n')
        out.write('# area_weighted = '
                  + ('true' if self.area_weighted else 'false') + '\n')
        out.write(','.join(['variable', 'model']
                           + [w.label for w in self.windows]) + '\n')
        for variable in self.variables:
            for model in self.models:
                out.write(','.join([variable, model] + [
                    '%.17g' % self.get(model, variable, w.label)
                    for w in self.windows
                ]) + '\n')
        return out.getvalue()

    def write_csv(self, path):
        """Write `to_csv` output to *path*."""
        with open(path, 'w', newline='') as f:
            f.write(self.to_csv())

    def __eq__(self, other):
        return (isinstance(other, EvalReport)
                and self.to_csv() == other.to_csv())

    __hash__ = None


def evaluate(pred, truth, variables=None, windows=None, area_weighted=True,
             model='model'):
    """Evaluate one prediction against the truth.

    Args:
        pred (`kremu.data.ScenarioDataset`): Predicted outputs.
        truth (`kremu.data.ScenarioDataset`): Reference outputs.
        variables (list[str]): Variables; default is every variable present
            in both datasets.
        windows (list[`LeadTimeWindow`]): Default `default_windows`.
        area_weighted (bool): Weight grid cells by ``cos(lat)``.
        model (str): Row label.

    Returns:
        `EvalReport`
    """
    windows = default_windows() if windows is None else windows
    if variables is None:
        variables = [v for v in truth.variables if v in pred.outputs]
        if not variables:
            raise MissingVariable('no output variable is present in both '
                                  + str(pred.name) + ' and '
                                  + str(truth.name))
    report = EvalReport(truth.name, windows, area_weighted)
    for variable in variables:
        for w in windows:
            report.add(model, variable, w,
                       rmse_window(pred, truth, variable, w, area_weighted))
    return report


def run_benchmark(train, test, config, windows=None):
    """Train every configured regressor and evaluate it on *test*.

    For each model in ``config.models`` an `kremu.emulator.Emulator` is fitted
    on the pooled training scenarios and predicts the test scenario. Cells are
    reported in (model, variable, window) order.

    Args:
        train (list[`kremu.data.ScenarioDataset`]): Training scenarios.
        test (`kremu.data.ScenarioDataset`): Test scenario with outputs.
        config (`kremu.config.RunConfig`): Run options.
        windows (list[`LeadTimeWindow`]): Default `default_windows`.

    Returns:
        `EvalReport`
    """
    windows = default_windows() if windows is None else windows
    report = EvalReport(test.name, windows, config.area_weighted)
    for model in config.models:
        logger.info('benchmark: training ' + model)
        emulator = Emulator(config.copy(model=model)).fit(train)
        pred = emulator.predict(test)
        for variable in config.variables:
            for w in windows:
                report.add(
                    model, variable, w,
                    rmse_window(pred, test, variable, w, config.area_weighted))
    return report


# tas RMSE on the SSP2-4.5 test scenario of the public benchmark dataset
REFERENCE_TAS_RMSE = {
    'gpr': dict(zip([w.label for w in default_windows()],
                    [0.308, 0.350, 0.353, 0.372, 0.38, 0.184])),
    'svr': dict(zip([w.label for w in default_windows()],
                    [0.299, 0.487, 0.366, 0.529, 0.462, 0.402])),
    'krr': dict(zip([w.label for w in default_windows()],
                    [0.337, 0.351, 0.356, 0.382, 0.379, 0.227])),
}


def reference_table():
    """Aligned text table of `REFERENCE_TAS_RMSE`."""
    report = EvalReport('published reference', default_windows())
    for model, row in REFERENCE_TAS_RMSE.items():
        for w in default_windows():
            report.add(model, 'tas', w, row[w.label])
    return report.to_table()


def check_ranking(report, variable='tas', window='20Y average'):
    """Check the expected qualitative ranking of a benchmark report.

    Returns:
        bool: True when every cell is finite and GPR is not worse than SVR
        on *variable* over *window*.
    """
    if not all(math.isfinite(value) for *_, value in report.cells()):
        return False
    return report.get('gpr', variable, window) <= report.get(
        'svr', variable, window)
