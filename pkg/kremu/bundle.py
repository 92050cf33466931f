# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""Model bundle files.

A bundle is a sequence of named, typed data chunks. The file starts with the
magic ``b'KRB1'``; each chunk follows as a fixed-size little endian header and
its data:

=========== ========== ==================================================
field       type       meaning
=========== ========== ==================================================
name        char[64]   Chunk name, UTF-8, NUL padded
type        uint8      Element type id, see `type_mapping`
ndim        uint8      1 for a vector, 2 for a matrix
reserved    uint16     0
N           uint64     Rows
M           uint64     Columns (1 for vectors)
data        type[N*M]  Row-major little endian values
=========== ========== ==================================================

Chunk names are paths such as ``tas/basis/components``. Text (configuration,
kernels) is stored as ``uint8`` chunks. Values are stored bit for bit, so a
reloaded model predicts exactly as the saved one.

Examples:
    Write and read back a chunk::

        with BundleWriter('model.krb') as f:
            f.write_chunk('alpha', numpy.array([1.0, 2.0]))

        with BundleFile(open('model.krb', 'rb')) as f:
            alpha = f.read_chunk('alpha')
"""

import logging
import struct
from collections import namedtuple

import numpy

logger = logging.getLogger('kremu.bundle')

MAGIC = b'KRB1'

chunk_header = namedtuple('chunk_header', 'name type ndim reserved N M')
chunk_header_struct = struct.Struct('<64sBBHQQ')

type_mapping = {
    1: numpy.dtype('<u1'),
    7: numpy.dtype('<i4'),
    8: numpy.dtype('<i8'),
    10: numpy.dtype('<f8'),
}

_type_ids = {dtype.kind + str(dtype.itemsize): tid
             for tid, dtype in type_mapping.items()}


class BundleError(IOError):
    """Malformed model bundle."""


class BundleFile(object):
    """Read-only access to a model bundle.

    Args:
        file: Binary file-like object positioned anywhere; it is read from
            the start.

    Use as a context manager to close the file on exit.
    """

    def __init__(self, file):
        self.__file = file
        logger.info('opening bundle: ' + str(getattr(file, 'name', file)))

        self.__file.seek(0, 2)
        file_size = self.__file.tell()
        self.__file.seek(0)
        if self.__file.read(len(MAGIC)) != MAGIC:
            raise BundleError('not a model bundle: '
                              + str(getattr(file, 'name', file)))

        # index the chunks: name -> (header, data location)
        self.__index = {}
        while True:
            raw = self.__file.read(chunk_header_struct.size)
            if len(raw) == 0:
                break
            if len(raw) != chunk_header_struct.size:
                raise BundleError('truncated chunk header')
            entry = chunk_header._make(chunk_header_struct.unpack(raw))
            name = entry.name.rstrip(b'\x00').decode('utf-8')
            if not self.__is_entry_valid(entry):
                raise BundleError('corrupt chunk header: ' + name)
            if name in self.__index:
                raise BundleError('duplicate chunk: ' + name)

            location = self.__file.tell()
            size = entry.N * entry.M * type_mapping[entry.type].itemsize
            if location + size > file_size:
                raise BundleError('bundle ends inside chunk ' + name)
            self.__file.seek(size, 1)
            self.__index[name] = (entry, location)

        self.__is_open = True

    @staticmethod
    def __is_entry_valid(entry):
        if entry.type not in type_mapping:
            return False
        if entry.ndim not in (1, 2):
            return False
        if entry.ndim == 1 and entry.M != 1:
            return False
        return entry.reserved == 0

    @property
    def names(self):
        """list[str]: Chunk names in file order."""
        return list(self.__index)

    def close(self):
        """Close the file. May be called more than once."""
        if self.__is_open:
            self.__is_open = False
            self.__index = None
            self.__file.close()

    def chunk_exists(self, name):
        """Test if a chunk exists.

        Args:
            name (str): Name of the chunk

        Returns:
            bool: True if the chunk exists in the file.
        """
        if not self.__is_open:
            raise ValueError("File is not open")
        return name in self.__index

    def read_chunk(self, name):
        """Read a data chunk and return it as a numpy array.

        Args:
            name (str): Name of the chunk

        Returns:
            `numpy.ndarray`: Vector or matrix in native byte order.

        Raises:
            KeyError: There is no such chunk.
            BundleError: The file ends inside the chunk.
        """
        if not self.__is_open:
            raise ValueError("File is not open")
        if name not in self.__index:
            raise KeyError('chunk ' + name + ' not found in bundle')
        entry, location = self.__index[name]

        logger.debug('read chunk: ' + name)
        dtype = type_mapping[entry.type]
        size = entry.N * entry.M * dtype.itemsize
        self.__file.seek(location, 0)
        data_raw = self.__file.read(size)
        if len(data_raw) != size:
            raise BundleError('bundle ends inside chunk ' + name)

        data = numpy.frombuffer(data_raw, dtype=dtype)
        data = data.astype(dtype.newbyteorder('='))
        if entry.ndim == 1:
            return data
        return data.reshape([entry.N, entry.M])

    def read_text(self, name):
        """Read a ``uint8`` chunk written by `BundleWriter.write_text`."""
        return self.read_chunk(name).tobytes().decode('utf-8')

    def read_scalar(self, name):
        """Read a one element chunk as a Python scalar."""
        data = self.read_chunk(name)
        if data.size != 1:
            raise BundleError('chunk ' + name + ' is not a scalar')
        return data.item()

    def find_matching_chunk_names(self, match):
        """Find chunk names that start with the string *match*.

        Returns:
            list[str]: Matching names in file order.
        """
        if not self.__is_open:
            raise ValueError("File is not open")
        return [name for name in self.__index if name.startswith(match)]

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()


class BundleWriter(object):
    """Write a model bundle.

    Args:
        path (str): Output file name. Existing files are overwritten.

    Chunks are written in call order. Use as a context manager.
    """

    def __init__(self, path):
        self.path = path
        self.__names = set()
        logger.info('writing bundle: ' + str(path))
        self.__file = open(path, 'wb')
        self.__file.write(MAGIC)

    def write_chunk(self, name, data):
        """Write an array chunk.

        Args:
            name (str): Chunk name, at most 63 UTF-8 bytes.
            data (array_like): 0, 1 or 2 dimensional data of a type in
                `type_mapping` (``bool`` is stored as ``uint8``).

        Raises:
            ValueError: The name is too long or repeated, or the data has an
                unsupported type or shape.
        """
        encoded = name.encode('utf-8')
        if len(encoded) > 63:
            raise ValueError('chunk name too long: ' + name)
        if name in self.__names:
            raise ValueError('duplicate chunk: ' + name)

        data = numpy.asarray(data)
        if data.dtype == numpy.bool_:
            data = data.astype(numpy.uint8)
        key = data.dtype.kind + str(data.dtype.itemsize)
        if key not in _type_ids:
            raise ValueError('unsupported chunk type ' + str(data.dtype)
                             + ' for ' + name)
        tid = _type_ids[key]
        if data.ndim == 0:
            data = data.reshape([1])
        if data.ndim == 1:
            n, m, ndim = data.shape[0], 1, 1
        elif data.ndim == 2:
            n, m, ndim = data.shape[0], data.shape[1], 2
        else:
            raise ValueError('chunk ' + name + ' has ' + str(data.ndim)
                             + ' dimensions')

        logger.debug('write chunk: ' + name)
        self.__file.write(
            chunk_header_struct.pack(encoded, tid, ndim, 0, n, m))
        self.__file.write(
            numpy.ascontiguousarray(data, dtype=type_mapping[tid]).tobytes())
        self.__names.add(name)

    def write_text(self, name, text):
        """Write text as a ``uint8`` chunk."""
        raw = numpy.frombuffer(text.encode('utf-8'), dtype=numpy.uint8)
        self.write_chunk(name, raw)

    def close(self):
        """Close the file."""
        if not self.__file.closed:
            self.__file.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()
