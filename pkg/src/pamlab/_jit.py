"""Numba switch.

Hot kernels are written twice: an ``@njit`` loop and a vectorised numpy
version.  ``PAMLAB_NO_NUMBA=1`` in the environment (or a missing numba
install) selects the numpy path everywhere.  Both paths consume the same
counter-based random streams, so they return the same numbers.
"""

from __future__ import annotations

import os

_flag = os.environ.get("PAMLAB_NO_NUMBA", "").strip().lower()

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` with on-disk caching, or the identity without numba."""
    if HAVE_NUMBA:
        import numba

        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
