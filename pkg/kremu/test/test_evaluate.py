# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Test kremu.evaluate."""

import math

import numpy
import pytest

from kremu import evaluate
from kremu.config import RunConfig
from kremu.data import GridMismatch, MissingVariable, synth_scenarios
from kremu.evaluate import (EvalReport, LeadTimeWindow, WindowNotCovered,
                            rmse_window)


def _shifted(d, offset_by_row):
    """Copy of *d* with tas shifted by a constant per latitude row."""
    offset = numpy.asarray(offset_by_row, dtype=numpy.float64)[None, :, None]
    return d.with_outputs({'tas': d.outputs['tas'] + offset}, name='pred')


def test_default_windows():
    """Test the six standard windows."""
    windows = evaluate.default_windows()
    assert [w.label for w in windows] == [
        '2050', '2100', '2045-2055', '2090-2100', '2050-2100', '20Y average'
    ]
    assert windows[-1] == LeadTimeWindow('20Y average', 2081, 2100)
    assert windows[-1].n_years == 20
    with pytest.raises(ValueError):
        LeadTimeWindow('bad', 2100, 2050)


def test_parse_windows():
    """Test window list parsing."""
    assert evaluate.parse_windows('default') == evaluate.default_windows()
    windows = evaluate.parse_windows('2050, 2090-2100, late=2081-2100')
    assert windows == [
        LeadTimeWindow('2050', 2050, 2050),
        LeadTimeWindow('2090-2100', 2090, 2100),
        LeadTimeWindow('late', 2081, 2100),
    ]
    for text in ('abc', '', ' , ', '2100-2050', '2050-x'):
        with pytest.raises(ValueError):
            evaluate.parse_windows(text)


def test_rmse_constant_offset(small_scenarios):
    """Test a uniform offset with and without weights."""
    truth = small_scenarios[3]
    pred = _shifted(truth, [0.5] * 4)
    for window in evaluate.default_windows():
        assert rmse_window(pred, truth, 'tas', window) == pytest.approx(0.5)
        assert rmse_window(pred, truth, 'tas', window,
                           area_weighted=False) == pytest.approx(0.5)
    assert rmse_window(truth, truth, 'tas',
                       evaluate.default_windows()[0]) == 0.0


def test_rmse_latitude_weights(small_scenarios):
    """Test that rows are weighted by cos(lat)."""
    truth = small_scenarios[3]
    offsets = numpy.array([1.0, 0.0, 0.0, 2.0])
    pred = _shifted(truth, offsets)
    w = numpy.cos(numpy.radians(truth.lat))
    window = LeadTimeWindow('late', 2081, 2100)
    expected = math.sqrt(numpy.sum(w * offsets**2) / numpy.sum(w))
    assert rmse_window(pred, truth, 'tas', window) == pytest.approx(expected)
    assert rmse_window(pred, truth, 'tas', window, area_weighted=False) == \
        pytest.approx(math.sqrt(numpy.mean(offsets**2)))


def test_rmse_averages_window_first(small_scenarios):
    """Test that errors cancelling within a window give zero."""
    truth = small_scenarios[3]
    tas = truth.outputs['tas'].copy()
    i = truth.year_index(2045)
    j = truth.year_index(2055)
    tas[i] += 1.0
    tas[j] -= 1.0
    pred = truth.with_outputs({'tas': tas})
    window = LeadTimeWindow('mid', 2045, 2055)
    assert rmse_window(pred, truth, 'tas', window) == pytest.approx(0.0,
                                                                    abs=1e-12)
    single = LeadTimeWindow('2045', 2045, 2045)
    assert rmse_window(pred, truth, 'tas', single) == pytest.approx(1.0)


def test_rmse_single_year(small_scenarios):
    """Test that a one year window is the plain RMSE of that year."""
    pred, truth = small_scenarios[2], small_scenarios[3]
    i = truth.year_index(2050)
    diff = pred.outputs['tas'][i] - truth.outputs['tas'][i]
    w = numpy.broadcast_to(numpy.cos(numpy.radians(truth.lat))[:, None],
                           diff.shape)
    window = LeadTimeWindow('2050', 2050, 2050)
    assert rmse_window(pred, truth, 'tas', window) == pytest.approx(
        math.sqrt(numpy.sum(w * diff**2) / numpy.sum(w)), rel=1e-12)
    assert rmse_window(pred, truth, 'tas', window,
                       area_weighted=False) == pytest.approx(
                           math.sqrt(numpy.mean(diff**2)), rel=1e-12)


def test_rmse_cell_relabeling(small_scenarios):
    """Test that shuffling cells within latitude rows keeps the RMSE."""
    rng = numpy.random.default_rng(12)
    pred, truth = small_scenarios[2], small_scenarios[3]
    n_lat, n_lon = truth.grid_shape
    order = numpy.array([rng.permutation(n_lon) for _ in range(n_lat)])
    rows = numpy.arange(n_lat)[:, None]

    def shuffle(d):
        return d.with_outputs({'tas': d.outputs['tas'][:, rows, order]})

    for window in evaluate.default_windows():
        assert rmse_window(shuffle(pred), shuffle(truth), 'tas',
                           window) == pytest.approx(
                               rmse_window(pred, truth, 'tas', window),
                               rel=1e-12)


def test_window_not_covered(small_scenarios):
    """Test windows outside the available years."""
    truth = small_scenarios[3]
    with pytest.raises(WindowNotCovered):
        rmse_window(truth, truth, 'tas', LeadTimeWindow('old', 1900, 1950))
    with pytest.raises(WindowNotCovered):
        rmse_window(truth, truth, 'tas', LeadTimeWindow('x', 2051, 2051))
    with pytest.raises(WindowNotCovered):
        rmse_window(truth, truth, 'tas', LeadTimeWindow('x', 2090, 2110))

    sparse = synth_scenarios(seed=3, n_scenarios=1, n_years=10, n_lat=4,
                             n_lon=6)[0]
    with pytest.raises(WindowNotCovered):
        rmse_window(sparse, truth, 'tas', LeadTimeWindow('m', 2045, 2055))


def test_rmse_errors(small_scenarios):
    """Test missing variables and grid mismatches."""
    truth = small_scenarios[3]
    pred = truth.with_outputs({'pr': truth.outputs['pr']})
    window = evaluate.default_windows()[1]
    with pytest.raises(MissingVariable):
        rmse_window(pred, truth, 'tas', window)
    other = synth_scenarios(seed=0, n_scenarios=1, n_years=24, n_lat=3,
                            n_lon=6)[0]
    with pytest.raises(GridMismatch):
        rmse_window(other, truth, 'tas', window)


def test_evaluate(small_scenarios):
    """Test the report of one prediction."""
    truth = small_scenarios[3]
    pred = _shifted(truth, [0.25] * 4)
    report = evaluate.evaluate(pred, truth, model='shift')
    assert report.models == ['shift']
    assert report.variables == ['tas']
    assert report.dataset == truth.name
    cells = list(report.cells())
    assert len(cells) == 6
    for model, variable, label, value in cells:
        assert (model, variable) == ('shift', 'tas')
        assert value == pytest.approx(0.25)

    with pytest.raises(MissingVariable):
        evaluate.evaluate(truth.with_outputs({}), truth)


def _report():
    windows = evaluate.parse_windows('2050, 20Y=2081-2100')
    report = EvalReport('test', windows)
    for i, model in enumerate(('gpr', 'svr')):
        for j, variable in enumerate(('tas', 'pr')):
            for k, w in enumerate(windows):
                report.add(model, variable, w, 0.1 * (i + 1) + j + 0.01 * k)
    return report


def test_report_csv(tmp_path):
    """Test the CSV layout."""
    report = _report()
    lines = report.to_csv().split('\n')
    assert lines[:3] == [
        '# dataset = test', '# area_weighted = true', 'variable,model,2050,20Y'
    ]
    assert lines[3] == 'tas,gpr,0.10000000000000001,' + '%.17g' % (0.1 + 0.01)
    assert [line.split(',')[:2] for line in lines[3:7]] == [
        ['tas', 'gpr'], ['tas', 'svr'], ['pr', 'gpr'], ['pr', 'svr']
    ]
    assert lines[7] == ''

    report.write_csv(tmp_path / 'r.csv')
    assert (tmp_path / 'r.csv').read_bytes() == report.to_csv().encode()


def test_report_table():
    """Test the text table."""
    table = _report().to_table()
    lines = table.splitlines()
    assert lines[0].split() == ['tas', '2050', '20Y']
    assert lines[1].split() == ['GPR', '0.1000', '0.1100']
    assert lines[-1] == 'RMSE on test (area weighted)'


def test_check_ranking():
    """Test the qualitative ranking check."""
    report = _report()
    assert evaluate.check_ranking(report, window='20Y')
    report.add('svr', 'tas', report.windows[1], 0.05)
    assert not evaluate.check_ranking(report, window='20Y')
    report.add('svr', 'tas', report.windows[1], 1.0)
    report.add('gpr', 'pr', report.windows[0], float('nan'))
    assert not evaluate.check_ranking(report, window='20Y')


def test_reference_table():
    """Test the published reference values."""
    assert sorted(evaluate.REFERENCE_TAS_RMSE) == ['gpr', 'krr', 'svr']
    assert evaluate.REFERENCE_TAS_RMSE['gpr']['20Y average'] == 0.184
    table = evaluate.reference_table()
    assert 'GPR' in table
    assert '0.1840' in table
    assert table.splitlines()[-1] == \
        'RMSE on published reference (area weighted)'


def test_run_benchmark(small_scenarios):
    """Test the benchmark over all regressors."""
    config = RunConfig(variables='tas', eof_k=2, kernel='matern32(ls=2)')
    train, test = small_scenarios[:3], small_scenarios[3]
    report = evaluate.run_benchmark(train, test, config)
    assert report.models == ['gpr', 'svr', 'krr']
    cells = list(report.cells())
    assert len(cells) == 3 * 6
    assert all(math.isfinite(value) and value >= 0 for *_, value in cells)

    again = evaluate.run_benchmark(train, test, config)
    assert again.to_csv() == report.to_csv()


def test_run_benchmark_unweighted(small_scenarios):
    """Test that the weighting option reaches the report."""
    config = RunConfig(models='krr', variables='tas', eof_k=2,
                       area_weighted=False)
    report = evaluate.run_benchmark(small_scenarios[:3], small_scenarios[3],
                                    config, evaluate.parse_windows('2100'))
    assert report.to_csv().split('\n')[1] == '# area_weighted = false'
    assert len(list(report.cells())) == 1


def test_run_benchmark_linear_truth():
    """Test that a linear kernel recovers noiseless linear scenarios."""
    scenarios = synth_scenarios(seed=2, n_scenarios=4, n_years=50, n_lat=4,
                                n_lon=8, noise=0.0, linear=True)
    config = RunConfig(models='gpr', kernel='linear(var=1) + bias(var=1)',
                       noise=1e-10, variables='tas', eof_k=4)
    report = evaluate.run_benchmark(scenarios[:3], scenarios[3], config)
    assert len(list(report.cells())) == 6
    for *_, value in report.cells():
        assert value <= 1e-6


@pytest.mark.validate
def test_benchmark_end_to_end():
    """Test accuracy on a held-out synthetic scenario."""
    scenarios = synth_scenarios(seed=0, n_scenarios=4, n_years=50, n_lat=8,
                                n_lon=16, noise=0.1)
    config = RunConfig(variables='tas, pr')
    report = evaluate.run_benchmark(scenarios[:3], scenarios[3], config)
    assert len(list(report.cells())) == 3 * 2 * 6
    for model in ('gpr', 'krr'):
        for w in report.windows:
            assert report.get(model, 'tas', w.label) <= 0.3
    for model in report.models:
        tas = numpy.mean([report.get(model, 'tas', w.label)
                          for w in report.windows])
        pr = numpy.mean([report.get(model, 'pr', w.label)
                         for w in report.windows])
        assert pr >= tas
    assert evaluate.run_benchmark(scenarios[:3], scenarios[3],
                                  config).to_csv() == report.to_csv()
