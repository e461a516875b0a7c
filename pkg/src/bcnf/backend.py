"""Kernel backend selection: compiled extension if available, else pure Python.

Set ``BCNF_FORCE_PYTHON_KERNEL=1`` to ignore the compiled extension (used by
the benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernel_py

if os.environ.get("BCNF_FORCE_PYTHON_KERNEL", "") not in ("", "0"):
    _kernel = None
else:
    try:
        from . import _kernel  # type: ignore[no-redef]
    except ImportError:
        _kernel = None

kernel = _kernel if _kernel is not None else _kernel_py

HAVE_COMPILED = _kernel is not None


def get_kernel(compiled: bool | None = None):
    """Return a kernel module; ``compiled=None`` means the default selection."""
    if compiled is None:
        return kernel
    if compiled:
        if _kernel is None:
            raise ImportError("compiled kernel bcnf._kernel is not available")
        return _kernel
    return _kernel_py
