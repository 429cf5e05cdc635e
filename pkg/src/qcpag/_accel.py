"""Backend switch for the hot kernels.

Every kernel in the package exists twice: a loop version compiled with
``numba.njit`` and a vectorized pure-numpy version.  The active backend is
read from the ``QCPAG_BACKEND`` environment variable at import time
(``numba`` or ``numpy``; default ``numba`` when numba is importable) and can
be changed at runtime with :func:`set_backend` or :func:`use_backend`.
"""

from __future__ import annotations

import contextlib
import os
from typing import Callable, Iterator

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def _initial_backend() -> str:
    name = os.environ.get("QCPAG_BACKEND", "").strip().lower()
    if name == "":
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in _VALID:
        raise ValueError(f"QCPAG_BACKEND must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("QCPAG_BACKEND=numba but numba is not installed")
    return name


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str) -> Iterator[None]:
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def kernel(fn: Callable) -> Callable:
    """Compile ``fn`` with numba (nopython, nogil, cached) when available."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def dispatch(nb_impl: Callable, np_impl: Callable) -> Callable:
    """Pick between the numba and numpy implementation of one kernel."""
    return nb_impl if _backend == "numba" else np_impl
