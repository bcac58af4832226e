"""Backend selection for the hot kernels.

Two implementations share one set of signatures:

* ``numba_backend``: JIT-compiled loops, the default whenever numba imports
  cleanly.
* ``numpy_backend``: vectorized/pure-Python fallback with no compilation
  step, always available.

The ``HASHLOOP_BACKEND`` environment variable ("numba" or "numpy") picks the
initial backend; :func:`set_backend` switches at runtime. Both backends
produce identical candidate sets; accumulated floating-point scores may
differ only by summation order.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

ENV_VAR = "HASHLOOP_BACKEND"
BACKENDS = ("numba", "numpy")

_active: ModuleType | None = None

__all__ = [
    "ENV_VAR",
    "BACKENDS",
    "numba_available",
    "default_backend",
    "set_backend",
    "active_backend",
    "kernels",
]


def _load(name: str) -> ModuleType:
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    return importlib.import_module(f"hashloop.kernels.{name}_backend")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except Exception:
        return False
    return True


def default_backend() -> str:
    """Backend chosen at first use: env override, else numba when importable."""
    env = os.environ.get(ENV_VAR)
    if env:
        return env
    return "numba" if numba_available() else "numpy"


def set_backend(name: str) -> None:
    """Force a backend for all subsequent index and similarity operations."""
    global _active
    _active = _load(name)


def active_backend() -> str:
    return kernels().BACKEND_NAME


def kernels() -> ModuleType:
    """The active backend module, loading the default on first use."""
    global _active
    if _active is None:
        _active = _load(default_backend())
    return _active
