"""Selects the epoch-kernel implementation at import time.

The compiled extension is preferred when importable; otherwise the pure
numpy module is used.  Set GLMSCREEN_BACKEND=python (or =compiled) to
force a choice, or call :func:`force` at runtime (used by the backend
benchmark and the equivalence tests).
"""

import os

from . import _kernels_py

_BACKENDS = {"python": _kernels_py}
try:
    from . import _kernels

    _BACKENDS["compiled"] = _kernels
except ImportError:
    pass

_env = os.environ.get("GLMSCREEN_BACKEND", "").strip().lower()
if _env:
    if _env not in _BACKENDS:
        raise ImportError(
            f"GLMSCREEN_BACKEND={_env!r} requested but that backend is unavailable"
        )
    _active = _env
else:
    _active = "compiled" if "compiled" in _BACKENDS else "python"


def available():
    return sorted(_BACKENDS)


def active_name():
    return _active


def kernels():
    return _BACKENDS[_active]


def force(name):
    """Switch backends; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available()})")
    prev = _active
    _active = name
    return prev
