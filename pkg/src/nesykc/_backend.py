"""Kernel backend selection.

Circuit passes exist twice: a numba ``@njit`` loop and a pure-numpy
level-synchronous version. ``NESYKC_BACKEND=numpy`` (or ``NESYKC_DISABLE_NUMBA=1``)
selects the fallback at import time; :func:`set_backend` switches at runtime.
"""

import contextlib
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _initial_backend():
    if os.environ.get("NESYKC_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    wanted = os.environ.get("NESYKC_BACKEND", "numba").strip().lower()
    if wanted not in BACKENDS:
        raise ValueError(f"NESYKC_BACKEND must be one of {BACKENDS}, got {wanted!r}")
    if wanted == "numba" and not HAVE_NUMBA:
        return "numpy"
    return wanted


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name):
    previous = get_backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
