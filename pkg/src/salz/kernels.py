"""Backend dispatch for the hot numeric kernels.

``load_backend`` gives direct access to a named backend (used by the
benchmark and by cross-backend equivalence tests); the module-level
functions delegate to the backend selected at import time (numba when
available, unless ``SALZ_DISABLE_NUMBA`` is set).
"""

from ._backend import BACKEND_NAME, USE_NUMBA


def load_backend(name: str):
    if name == "numba":
        from . import _kernels_numba as backend
    elif name == "numpy":
        from . import _kernels_numpy as backend
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    return backend


_active = load_backend("numba" if USE_NUMBA else "numpy")

eigh_grid = _active.eigh_grid
cd_grid = _active.cd_grid
evolve_kernel = _active.evolve_kernel
overlap_deficit_kernel = _active.overlap_deficit_kernel


def backend_name() -> str:
    return BACKEND_NAME
