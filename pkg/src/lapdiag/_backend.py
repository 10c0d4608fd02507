"""Kernel backend selection.

Hot loops exist twice: a numba ``@njit`` version and a pure-numpy version.
The numba path is used when numba imports cleanly, unless the environment
variable ``LAPDIAG_BACKEND=numpy`` is set before lapdiag is imported.
"""

import os

BACKEND_ENV = "LAPDIAG_BACKEND"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _select_backend():
    requested = os.environ.get(BACKEND_ENV, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


BACKEND = _select_backend()
