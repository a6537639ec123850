"""Backend selection for the compiled kernels.

Set ``QIGEOM_DISABLE_NUMBA=1`` before importing qigeom to force the pure
numpy path. When numba is missing the numpy path is used automatically.
"""

import os

_DISABLED = os.environ.get("QIGEOM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by QIGEOM_DISABLE_NUMBA")
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:
    _numba_njit = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it untouched."""
    if _numba_njit is None:
        return fn
    return _numba_njit(cache=True, nogil=True)(fn)
