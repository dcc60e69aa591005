"""Optional numba acceleration.

Set ``HOPWIRE_DISABLE_NUMBA=1`` before importing :mod:`hopwire` to run every
kernel through its pure-numpy fallback. The flag is read once at import.
"""
import os

_FLAG = "HOPWIRE_DISABLE_NUMBA"

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes")

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
}


def njit(func):
    """Compile ``func`` with the default options, or return it untouched if numba is missing."""
    if not HAVE_NUMBA:  # pragma: no cover
        return func
    return _njit(**numba_default)(func)
