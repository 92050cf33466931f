# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""CBX scenario files.

A CBX file stores one `kremu.data.ScenarioDataset`. All values are little
endian and arrays are stored year-major, then latitude-major:

=================== ======================================= ==============
field               type                                    count
=================== ======================================= ==============
magic               ``b'CBX1'``                             4 bytes
n_years             uint32                                  1
n_lat               uint32                                  1
n_lon               uint32                                  1
output_mask         uint32 (bit i: variable i present)      1
lat_degrees         float64                                 n_lat
years               int32                                   n_years
co2                 float64                                 n_years
ch4                 float64                                 n_years
so2                 float64                                 n_years*n_lat*n_lon
bc                  float64                                 n_years*n_lat*n_lon
outputs             float64, per present variable in order  n_years*n_lat*n_lon
                    tas, dtr, pr, pr90
=================== ======================================= ==============

Floats are written and read bit for bit. The scenario name is not stored;
`read` names the dataset after the file.

Examples:
    Round trip a dataset::

        kremu.cbx.write(dataset, 'ssp245.cbx')
        dataset = kremu.cbx.read('ssp245.cbx')
"""

import logging
import os
import struct
from collections import namedtuple

import numpy

from .data import OUTPUT_VARIABLES, InvalidDimensions, ScenarioDataset

logger = logging.getLogger('kremu.cbx')

MAGIC = b'CBX1'

cbx_header = namedtuple('cbx_header', 'magic n_years n_lat n_lon output_mask')
cbx_header_struct = struct.Struct('<4sIIII')

_F64 = numpy.dtype('<f8')
_I32 = numpy.dtype('<i4')


class CbxError(IOError):
    """Base class of CBX format errors."""


class BadMagic(CbxError):
    """The file does not start with the CBX magic."""


class TruncatedFile(CbxError):
    """The file ends before the data its header announces."""


class InvalidHeader(CbxError):
    """The header or the data it describes is inconsistent."""


def _name_of(file):
    if isinstance(file, (str, os.PathLike)):
        return os.path.splitext(os.path.basename(os.fspath(file)))[0]
    return os.path.splitext(os.path.basename(str(getattr(file, 'name',
                                                         'cbx'))))[0]


def _read_exact(f, count, what):
    raw = f.read(count)
    if len(raw) != count:
        raise TruncatedFile('CBX file ends inside ' + what + ' (expected '
                            + str(count) + ' bytes, got ' + str(len(raw))
                            + ')')
    return raw


def _read_array(f, dtype, count, what):
    raw = _read_exact(f, dtype.itemsize * count, what)
    return numpy.frombuffer(raw, dtype=dtype)


def read_header(f):
    """Read and check the header from a binary file object.

    Returns:
        cbx_header: The header.

    Raises:
        BadMagic: The magic is wrong.
        TruncatedFile: The header is incomplete.
        InvalidHeader: A count is zero or the mask has unknown bits.
    """
    raw = f.read(cbx_header_struct.size)
    if len(raw) >= 4 and raw[:4] != MAGIC:
        raise BadMagic('not a CBX file (magic ' + repr(raw[:4]) + ')')
    if len(raw) != cbx_header_struct.size:
        raise TruncatedFile('CBX header is incomplete')
    header = cbx_header._make(cbx_header_struct.unpack(raw))

    if header.n_years == 0 or header.n_lat == 0 or header.n_lon == 0:
        raise InvalidHeader('CBX header has a zero dimension: '
                            + str(header))
    if header.output_mask >> len(OUTPUT_VARIABLES):
        raise InvalidHeader('CBX output mask has unknown bits: '
                            + hex(header.output_mask))
    return header


def _read(f, name):
    header = read_header(f)
    n_cells = header.n_years * header.n_lat * header.n_lon

    lat = _read_array(f, _F64, header.n_lat, 'lat_degrees')
    years = _read_array(f, _I32, header.n_years, 'years')
    co2 = _read_array(f, _F64, header.n_years, 'co2')
    ch4 = _read_array(f, _F64, header.n_years, 'ch4')
    so2 = _read_array(f, _F64, n_cells, 'so2')
    bc = _read_array(f, _F64, n_cells, 'bc')
    outputs = {}
    for i, variable in enumerate(OUTPUT_VARIABLES):
        if header.output_mask & (1 << i):
            outputs[variable] = _read_array(f, _F64, n_cells, variable)

    if f.read(1):
        raise InvalidHeader('CBX file has data past the announced arrays')

    d = ScenarioDataset(name=name,
                        years=years,
                        lat=lat,
                        n_lon=header.n_lon,
                        co2=co2,
                        ch4=ch4,
                        so2=so2,
                        bc=bc,
                        outputs=outputs)
    try:
        d.validate()
    except InvalidDimensions as error:
        raise InvalidHeader('invalid CBX contents: ' + str(error)) from error
    return d


def read(file):
    """Read a CBX file.

    Args:
        file: Path or binary file-like object.

    Returns:
        `kremu.data.ScenarioDataset`: The dataset.

    Raises:
        BadMagic: The file is not a CBX file.
        TruncatedFile: The file is shorter than its header announces.
        InvalidHeader: The header or contents are inconsistent.
    """
    name = _name_of(file)
    if isinstance(file, (str, os.PathLike)):
        logger.info('reading CBX file: ' + os.fspath(file))
        with open(file, 'rb') as f:
            return _read(f, name)
    return _read(file, name)


def _encode(d):
    d.validate()
    header = cbx_header_struct.pack(MAGIC, d.n_years, d.n_lat, d.n_lon,
                                    d.output_mask)
    parts = [
        header,
        d.lat.astype(_F64).tobytes(),
        d.years.astype(_I32).tobytes(),
        d.co2.astype(_F64).tobytes(),
        d.ch4.astype(_F64).tobytes(),
        d.so2.astype(_F64).tobytes(),
        d.bc.astype(_F64).tobytes(),
    ]
    for variable in d.variables:
        parts.append(d.outputs[variable].astype(_F64).tobytes())
    return b''.join(parts)


def write(d, file):
    """Write a dataset to a CBX file.

    Args:
        d (`kremu.data.ScenarioDataset`): Dataset. It is validated first.
        file: Path or binary file-like object.
    """
    data = _encode(d)
    if isinstance(file, (str, os.PathLike)):
        logger.info('writing CBX file: ' + os.fspath(file))
        with open(file, 'wb') as f:
            f.write(data)
    else:
        file.write(data)
