# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Export single fields as images or text.

* `write_pgm` - 8-bit binary PGM (P5), northernmost row first, values
  min-max scaled to 0-255. A constant field maps to 0.
* `write_csv` - ``lat,lon,value`` rows with 17 significant digits, which
  parse back to the exact values.
"""

import logging

import numpy

from .data import INPUT_FIELDS, MissingVariable, check_same_grid

logger = logging.getLogger('kremu.export')

FORMATS = ('pgm', 'csv')


def select_field(d, variable, year, minus=None):
    """Return the (*L*, *W*) field of *variable* in *year*.

    Args:
        d (`kremu.data.ScenarioDataset`): Dataset.
        variable (str): Output variable, ``so2`` or ``bc``.
        year (int): Year.
        minus (`kremu.data.ScenarioDataset`): When given, its field is
            subtracted (difference map).

    Raises:
        MissingVariable: *variable* is absent.
        GridMismatch: *minus* uses another grid.
        ValueError: *year* is absent.
    """
    sources = [d] if minus is None else [d, minus]
    for source in sources:
        if variable not in INPUT_FIELDS and variable not in source.outputs:
            raise MissingVariable('dataset ' + str(source.name) + ' has no '
                                  + str(variable))
    try:
        field = d.field(variable, year)
        if minus is not None:
            check_same_grid(d, minus)
            field = field - minus.field(variable, year)
    except KeyError as error:
        raise ValueError(error.args[0]) from None
    return field


def to_gray(field):
    """Scale a field to 8-bit gray levels, northernmost row first.

    Args:
        field ((*L*, *W*) array_like): Field with latitude increasing along
            axis 0.

    Returns:
        (*L*, *W*) `numpy.ndarray` of ``numpy.uint8``
    """
    field = numpy.asarray(field, dtype=numpy.float64)[::-1]
    lo = field.min()
    hi = field.max()
    if hi > lo:
        levels = numpy.rint((field - lo) / (hi - lo) * 255.0)
    else:
        levels = numpy.zeros(field.shape)
    return levels.astype(numpy.uint8)


def write_pgm(field, path):
    """Write a field as a binary PGM image."""
    gray = to_gray(field)
    height, width = gray.shape
    logger.info('writing PGM: ' + str(path))
    with open(path, 'wb') as f:
        f.write(b'P5\n%d %d\n255\n' % (width, height))
        f.write(gray.tobytes())


def write_csv(field, lat, lon, path):
    """Write a field as ``lat,lon,value`` rows after a header row."""
    field = numpy.asarray(field, dtype=numpy.float64)
    logger.info('writing CSV: ' + str(path))
    with open(path, 'w', newline='') as f:
        f.write('lat,lon,value\n')
        for i, phi in enumerate(lat):
            for j, lam in enumerate(lon):
                f.write('%.17g,%.17g,%.17g\n' % (phi, lam, field[i, j]))


def export_grid(d, variable, year, fmt, path, minus=None):
    """Export one field of a dataset.

    Args:
        d (`kremu.data.ScenarioDataset`): Dataset.
        variable (str): Output variable, ``so2`` or ``bc``.
        year (int): Year.
        fmt (str): ``'pgm'`` or ``'csv'``.
        path (str): Output file.
        minus (`kremu.data.ScenarioDataset`): Optional dataset to subtract.
    """
    if fmt not in FORMATS:
        raise ValueError('format must be one of ' + ', '.join(FORMATS))
    field = select_field(d, variable, year, minus)
    if fmt == 'pgm':
        write_pgm(field, path)
    else:
        write_csv(field, d.lat, d.lon, path)
