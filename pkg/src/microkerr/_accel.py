"""Backend selection for the batch kernels.

``MICROKERR_BACKEND=numba`` (default when numba imports) or ``numpy``.
"""

import os

BACKEND_ENV = "MICROKERR_BACKEND"
BACKENDS = ("numba", "numpy")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def resolve_backend(name=None) -> str:
    name = name or os.environ.get(BACKEND_ENV) or ("numba" if HAVE_NUMBA else "numpy")
    name = name.lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return name
