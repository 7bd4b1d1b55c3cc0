"""Kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set ``MPPLAN_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the equivalence tests).
"""

import os

from . import _kernels_py

BACKEND = "python"
first_fit = _kernels_py.first_fit
xpm_psi_sum = _kernels_py.xpm_psi_sum

if not os.environ.get("MPPLAN_PURE_PYTHON"):
    try:
        from . import _kernels as _ext
    except ImportError:  # extension not built
        _ext = None
    if _ext is not None:
        BACKEND = "cython"
        first_fit = _ext.first_fit
        xpm_psi_sum = _ext.xpm_psi_sum

__all__ = ["BACKEND", "first_fit", "xpm_psi_sum"]
