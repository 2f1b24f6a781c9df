"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module. Set ``NOTIFY_TIMING_PURE=1`` to force the
fallback. Both expose the same functions and constants.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

_ckernels: ModuleType | None
try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

# constants are defined once, in the pure module
POLICY_NA = _pykernels.POLICY_NA
POLICY_NAW = _pykernels.POLICY_NAW
POLICY_ONP = _pykernels.POLICY_ONP
POLICY_REPLAY = _pykernels.POLICY_REPLAY
POLICY_CALLBACK = _pykernels.POLICY_CALLBACK
OPTIMAL = _pykernels.OPTIMAL
TIME_LIMIT = _pykernels.TIME_LIMIT
INFEASIBLE = _pykernels.INFEASIBLE
TIME_LIMIT_NO_INCUMBENT = _pykernels.TIME_LIMIT_NO_INCUMBENT
MODE_NTP = _pykernels.MODE_NTP
MODE_NTP2 = _pykernels.MODE_NTP2


def available_backends() -> list[str]:
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "cython")
    return names


def get_backend(name: str | None = None) -> ModuleType:
    """Return a kernel module by name ("cython", "python") or the active default."""
    if name is None:
        return backend
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _default() -> ModuleType:
    if os.environ.get("NOTIFY_TIMING_PURE") == "1" or _ckernels is None:
        return _pykernels
    return _ckernels


backend = _default()
BACKEND_NAME = backend.NAME
