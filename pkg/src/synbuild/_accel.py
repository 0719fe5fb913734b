"""Optional numba acceleration.

Set ``SYNBUILD_DISABLE_NUMBA=1`` to force the pure-numpy code paths. Every
kernel in :mod:`synbuild.kernels` has both variants and they must agree
exactly.
"""

import os

_DISABLED = os.environ.get("SYNBUILD_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)

try:
    if _DISABLED:
        raise ImportError("disabled by SYNBUILD_DISABLE_NUMBA")
    import numba

    NUMBA_AVAILABLE = True
except ImportError:
    numba = None
    NUMBA_AVAILABLE = False


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when available, else the identity decorator."""
    if NUMBA_AVAILABLE:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(fn):
        return fn

    return wrap


def use_numba():
    return NUMBA_AVAILABLE
