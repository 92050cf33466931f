# Copyright (c) 2023-2026 The kremu developers
# Part of kremu, released under the BSD 2-Clause License.

"""The kremu main module.

The main package :py:mod:`kremu` is the root package. It holds the regressors
(:py:mod:`kremu.gpr`, :py:mod:`kremu.svr`, :py:mod:`kremu.krr`), the shared
kernel algebra (:py:mod:`kremu.kernels`) and linear algebra
(:py:mod:`kremu.numerics`), and the emulation pipeline around them. The
submodules are not imported by default. Import them explicitly before use::

    import kremu.gpr

    import kremu.data

Attributes:
    __version__ (str): kremu software version number. This is the version
                       number of the software package as a whole, not the CBX
                       or bundle format version it reads/writes.
"""

import sys
from .version import __version__  # noqa: F401

if sys.version_info < (3, 8) or sys.version_info >= (4, 0):
    raise RuntimeError("Python ~= 3.8 is required")
