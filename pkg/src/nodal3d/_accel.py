"""Numba dispatch.

Hot kernels are compiled with numba when it is importable. Setting the
environment variable ``NODAL3D_DISABLE_NUMBA=1`` before import forces the
pure-numpy implementations, which compute the same quantities.
"""

import os

_disabled = os.environ.get("NODAL3D_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError("disabled by NODAL3D_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def use_numba():
    return HAS_NUMBA
