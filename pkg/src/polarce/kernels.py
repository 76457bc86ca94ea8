"""Backend selection for the steering kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is used.  Setting ``POLARCE_PURE_PYTHON=1`` forces the
fallback (handy for benchmarking and for debugging the extension).
"""

import os

from . import _steering_py

BACKEND = "python"

if os.environ.get("POLARCE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _steering as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _steering_py
else:
    _impl = _steering_py

steering_matrix = _impl.steering_matrix
steering_with_derivatives = _impl.steering_with_derivatives
path_excess = _steering_py.path_excess

__all__ = ["BACKEND", "steering_matrix", "steering_with_derivatives", "path_excess"]
