"""Kernel backend selection.

Hot numeric loops exist twice: a numba ``@njit`` implementation and a
pure-numpy one with identical semantics.  The numba path is used when
numba imports cleanly, unless the environment variable
``SALZ_DISABLE_NUMBA`` is set to a truthy value (1/true/yes/on), in
which case the numpy path is selected.  Resolution happens once at
import time.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}


def numba_disabled_by_env() -> bool:
    return os.environ.get("SALZ_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not numba_disabled_by_env()

BACKEND_NAME = "numba" if USE_NUMBA else "numpy"
