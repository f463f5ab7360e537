"""Selection of the simulation kernel backend.

The JIT backend compiles the event loops with numba; the numpy backend
is a pure-vectorized fallback with the same contract and draw sequence.
Set ``HQC_BACKEND`` to ``numba``, ``numpy``, or ``auto`` (default: use
numba when importable).
"""

from __future__ import annotations

import os
import warnings

_VALID = ("auto", "numba", "numpy")
_kernels_cache: dict[str, object] = {}
_warned = False


def backend_name(override: str | None = None) -> str:
    """Resolve the backend name from the override or the environment."""
    global _warned
    name = override or os.environ.get("HQC_BACKEND", "auto")
    if name not in _VALID:
        raise ValueError(
            f"unknown backend {name!r}; expected one of {_VALID}")
    if name == "auto":
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError:
            if not _warned:
                warnings.warn("numba unavailable; falling back to the "
                              "numpy kernels (HQC_BACKEND=numpy)")
                _warned = True
            return "numpy"
    return name


def get_kernels(override: str | None = None):
    """Kernel module for the resolved backend (cached)."""
    name = backend_name(override)
    mod = _kernels_cache.get(name)
    if mod is None:
        if name == "numba":
            from . import _kernels_numba as mod
        else:
            from . import _kernels_numpy as mod
        _kernels_cache[name] = mod
    return mod
