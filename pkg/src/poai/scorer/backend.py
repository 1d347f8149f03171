"""Kernel backend selection.

The scorer's inner loops have two interchangeable implementations: a
numba-compiled one (default when numba is importable) and a pure-numpy
one. The ``POAI_BACKEND`` environment variable picks the backend at
import time:

* unset or ``auto`` -- numba if available, else numpy
* ``numba``         -- require numba, fail if it cannot be imported
* ``numpy``         -- force the pure-numpy kernels

``benchmarks/bench_backends.py`` compares the two directly.
"""

import os
import warnings

from poai.errors import ConfigurationError

ENV_VAR = "POAI_BACKEND"


def _resolve() -> str:
    requested = os.environ.get(ENV_VAR, "auto").strip().lower() or "auto"
    if requested not in ("auto", "numba", "numpy"):
        raise ConfigurationError(
            f"{ENV_VAR} must be one of auto/numba/numpy, got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise
        warnings.warn("numba is not importable; using the pure-numpy scorer kernels")
        return "numpy"
    return "numba"


ACTIVE_BACKEND = _resolve()

if ACTIVE_BACKEND == "numba":
    from poai.scorer import kernels_numba as kernels
else:
    from poai.scorer import kernels_numpy as kernels


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return ACTIVE_BACKEND
