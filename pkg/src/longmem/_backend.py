"""Kernel backend selection.

Hot loops are written twice: a numba ``@njit`` version and a vectorised
numpy/scipy version. ``LONGMEM_BACKEND`` picks one at import time
(``numba`` or ``numpy``); numba is used when importable and not disabled.
"""
from __future__ import annotations

import contextlib
import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAVE_NUMBA = _numba is not None
BACKENDS = ("numba", "numpy")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if _numba is not None:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def _initial_backend() -> str:
    requested = os.environ.get("LONGMEM_BACKEND", "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if requested not in BACKENDS:
        raise ValueError(f"LONGMEM_BACKEND must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        raise ImportError("LONGMEM_BACKEND=numba but numba is not installed")
    return requested


_current = _initial_backend()


def get_backend() -> str:
    return _current


def set_backend(name: str) -> None:
    global _current
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not installed")
    _current = name


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch kernel backend (tests, benchmarks)."""
    previous = _current
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
