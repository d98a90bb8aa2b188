"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``TIME4LAB_PURE=1`` to force the pure-Python implementations.
"""

import os

from . import _kernels_py

IMPLEMENTATION = "python"

if os.environ.get("TIME4LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

lossless_assignments = _impl.lossless_assignments
excess_integral = _impl.excess_integral

__all__ = ["lossless_assignments", "excess_integral", "IMPLEMENTATION"]
