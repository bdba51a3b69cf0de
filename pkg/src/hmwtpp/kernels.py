"""Kernel backend selection.

The compiled extension is used when present; the numpy implementation is the
always-available fallback.  Set HMWTPP_KERNEL=python (or =cython) to force a
backend, e.g. for the kernel benchmark.
"""

import os

from . import _kernels_py

_forced = os.environ.get("HMWTPP_KERNEL", "").strip().lower()

if _forced == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "HMWTPP_KERNEL=cython but hmwtpp._kernels_c is not built; "
                "reinstall without HMWTPP_NO_EXT"
            )
        _impl = _kernels_py
        BACKEND = "python"

AT_LOWER = _kernels_py.AT_LOWER
AT_UPPER = _kernels_py.AT_UPPER
BASIC = _kernels_py.BASIC
FREE = _kernels_py.FREE

primal_entering = _impl.primal_entering
primal_ratio = _impl.primal_ratio
apply_pivot = _impl.apply_pivot
