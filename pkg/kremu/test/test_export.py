# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Test kremu.export."""

import numpy
import pytest

from kremu import export
from kremu.data import GridMismatch, MissingVariable, synth_scenarios


def test_to_gray():
    """Test min-max scaling and row order."""
    field = numpy.array([[0.0, 1.0, 2.0], [3.0, 4.0, 6.0]])
    gray = export.to_gray(field)
    assert gray.dtype == numpy.uint8
    numpy.testing.assert_array_equal(gray, [[128, 170, 255], [0, 42, 85]])
    numpy.testing.assert_array_equal(export.to_gray(numpy.full((2, 2), 3.5)),
                                     numpy.zeros((2, 2)))


def test_write_pgm(tmp_path):
    """Test the PGM header and pixel bytes."""
    field = numpy.arange(6.0).reshape(2, 3)
    export.write_pgm(field, tmp_path / 'f.pgm')
    raw = (tmp_path / 'f.pgm').read_bytes()
    header = b'P5\n3 2\n255\n'
    assert raw.startswith(header)
    assert raw[len(header):] == bytes([153, 204, 255, 0, 51, 102])


def test_write_csv(tmp_path):
    """Test that CSV values parse back exactly."""
    lat = numpy.array([-45.0, 45.0])
    lon = numpy.array([90.0, 270.0])
    field = numpy.array([[0.1, 1.0 / 3.0], [-2e-300, numpy.pi]])
    export.write_csv(field, lat, lon, tmp_path / 'f.csv')
    lines = (tmp_path / 'f.csv').read_text().splitlines()
    assert lines[0] == 'lat,lon,value'
    assert len(lines) == 5
    assert lines[1].split(',')[:2] == ['-45', '90']
    values = numpy.array([float(line.split(',')[2]) for line in lines[1:]])
    assert values.tobytes() == field.ravel().tobytes()


@pytest.fixture(scope='module')
def pair():
    """Two scenarios on one grid."""
    return synth_scenarios(seed=11, n_scenarios=2, n_years=4, n_lat=3,
                           n_lon=5)


def test_select_field(pair):
    """Test field selection and difference maps."""
    a, b = pair
    year = int(a.years[1])
    numpy.testing.assert_array_equal(export.select_field(a, 'pr', year),
                                     a.outputs['pr'][1])
    numpy.testing.assert_array_equal(export.select_field(a, 'so2', year),
                                     a.so2[1])
    numpy.testing.assert_array_equal(
        export.select_field(a, 'tas', year, minus=b),
        a.outputs['tas'][1] - b.outputs['tas'][1])
    numpy.testing.assert_array_equal(
        export.select_field(a, 'tas', year, minus=a), numpy.zeros((3, 5)))


def test_select_field_errors(pair):
    """Test missing variables, years and grids."""
    a, b = pair
    year = int(a.years[0])
    with pytest.raises(MissingVariable):
        export.select_field(a.with_outputs({}), 'tas', year)
    with pytest.raises(MissingVariable):
        export.select_field(a, 'tas', year, minus=b.with_outputs({}))
    with pytest.raises(ValueError):
        export.select_field(a, 'tas', 1850)
    other = synth_scenarios(seed=0, n_scenarios=1, n_years=4, n_lat=2,
                            n_lon=5)[0]
    with pytest.raises(GridMismatch):
        export.select_field(a, 'tas', year, minus=other)


@pytest.mark.parametrize('fmt', export.FORMATS)
def test_export_grid(tmp_path, pair, fmt):
    """Test both output formats."""
    a, _ = pair
    path = tmp_path / ('out.' + fmt)
    export.export_grid(a, 'tas', int(a.years[-1]), fmt, path)
    raw = path.read_bytes()
    if fmt == 'pgm':
        assert raw.startswith(b'P5\n5 3\n255\n')
        assert len(raw) == len(b'P5\n5 3\n255\n') + 15
    else:
        assert raw.startswith(b'lat,lon,value\n')
        assert raw.count(b'\n') == 16

    with pytest.raises(ValueError):
        export.export_grid(a, 'tas', int(a.years[-1]), 'png', path)
