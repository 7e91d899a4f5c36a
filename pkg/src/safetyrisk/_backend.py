"""Select the compiled kernels when available, numpy otherwise."""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SAFETYRISK_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

gauss_kernel_sum = _impl.gauss_kernel_sum
count_inversions = _impl.count_inversions


def available_backends():
    """Map of backend name to kernel module, for tests and benchmarks."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
