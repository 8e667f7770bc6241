"""Optional numba acceleration for the hot kernels.

Numba is used when importable. Set ``HDSFT_NO_NUMBA=1`` to force the
pure-numpy kernels, e.g. to compare both paths or to debug.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("HDSFT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

USE_NUMBA = numba is not None and not _DISABLED


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)
