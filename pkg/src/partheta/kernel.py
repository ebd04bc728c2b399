"""Selects the theta-series kernel at import.

The compiled GMP kernel is used when it was built; otherwise the
pure-Python fixed-point loop. ``PARTHETA_PURE_PYTHON=1`` forces the latter.
"""

import os
import warnings

from . import _kernel_py

BACKENDS = {"python": _kernel_py.theta_moments}

try:
    from . import _kernel as _kernel_c
except ImportError:
    _kernel_c = None
else:
    BACKENDS["compiled"] = _kernel_c.theta_moments

if _kernel_c is not None and not os.environ.get("PARTHETA_PURE_PYTHON"):
    BACKEND = "compiled"
else:
    BACKEND = "python"
    if _kernel_c is None and not os.environ.get("PARTHETA_PURE_PYTHON"):
        warnings.warn("compiled kernel unavailable, falling back to pure Python", RuntimeWarning)

theta_moments = BACKENDS[BACKEND]
