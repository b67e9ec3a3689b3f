"""Numba switch.

Set ``TWISTLAB_DISABLE_NUMBA=1`` to force the pure-numpy kernels. The flag is
read once at import time.
"""
import os

DISABLED = os.environ.get("TWISTLAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
