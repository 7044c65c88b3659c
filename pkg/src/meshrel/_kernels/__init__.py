"""Trial kernels: compiled lane with a pure-Python fallback.

The compiled extension is optional; when it failed to build or was skipped
(``MESHREL_PURE=1`` at install time) the pure lane takes over transparently.
Both lanes follow the same draw contract and return identical counts.
"""

from __future__ import annotations

from types import ModuleType

from . import _mc_py

try:
    from . import _mc_cy
except ImportError:  # pragma: no cover - depends on how the package was built
    _mc_cy = None


def backend_name() -> str:
    """Name of the kernel lane picked by default (``cython`` or ``python``)."""
    return "python" if _mc_cy is None else "cython"


def available_backends() -> tuple[str, ...]:
    """Every accepted backend selector, given how the package was built."""
    if _mc_cy is None:
        return ("auto", "python")
    return ("auto", "python", "cython")


def get_backend(name: str = "auto") -> ModuleType:
    if name == "auto":
        return _mc_py if _mc_cy is None else _mc_cy
    if name == "python":
        return _mc_py
    if name == "cython":
        if _mc_cy is None:
            raise RuntimeError("compiled kernel backend is not available")
        return _mc_cy
    raise ValueError(f"unknown kernel backend {name!r}")
