"""Backend selection for the hot kernels.

``HURWITZ_BACKEND=numpy`` (or ``HURWITZ_DISABLE_NUMBA=1``) selects the pure
numpy path; otherwise numba is used when it can be imported.  Both paths
expose the same functions with the same signatures.
"""

from __future__ import annotations

import importlib
import logging
import os
from types import ModuleType

log = logging.getLogger(__name__)

BACKENDS = ("numba", "numpy")


def _default_backend() -> str:
    if os.environ.get("HURWITZ_DISABLE_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("HURWITZ_BACKEND", "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"HURWITZ_BACKEND must be one of {BACKENDS}, got {name!r}")
    return name


_active: ModuleType | None = None
_active_name = ""


def set_backend(name: str) -> str:
    """Switch backend at runtime; returns the backend actually in use."""
    global _active, _active_name
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba":
        try:
            mod = importlib.import_module("hurwitz._kernels_numba")
        except ImportError as exc:  # pragma: no cover - numba is a hard dep in CI
            log.warning("numba unavailable (%s); using numpy kernels", exc)
            name, mod = "numpy", importlib.import_module("hurwitz._kernels_numpy")
    else:
        mod = importlib.import_module("hurwitz._kernels_numpy")
    _active, _active_name = mod, name
    return name


def backend() -> str:
    if _active is None:
        set_backend(_default_backend())
    return _active_name


def impl() -> ModuleType:
    if _active is None:
        set_backend(_default_backend())
    return _active
