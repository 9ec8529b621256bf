"""Kernel backend selection.

The compiled extension is picked at import when built; otherwise the numpy
fallback is used. `BOXHASH_BACKEND` (auto / compiled / python) forces the
choice at import, and `override` swaps it temporarily, which the benchmark
harness uses to compare the two backends.

Hash codes are always computed by the shared numpy routines in `hashing`,
so cell assignment never depends on the backend; the backends only differ
in how the suppression loops are executed.
"""

import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

__all__ = ["COMPILED_AVAILABLE", "active", "available", "kernels", "override"]

COMPILED_AVAILABLE = _compiled is not None


def _resolve(name: str | None) -> str:
    if name in (None, "", "auto"):
        return "compiled" if COMPILED_AVAILABLE else "python"
    if name == "compiled":
        if not COMPILED_AVAILABLE:
            raise RuntimeError("compiled kernels requested but the extension is not built")
        return "compiled"
    if name == "python":
        return "python"
    raise ValueError(f"unknown backend {name!r} (expected auto, compiled or python)")


_active = _resolve(os.environ.get("BOXHASH_BACKEND"))


def active() -> str:
    """Name of the backend currently in use."""
    return _active


def available() -> tuple[str, ...]:
    return ("compiled", "python") if COMPILED_AVAILABLE else ("python",)


def kernels():
    """The kernel namespace for the active backend."""
    return _compiled if _active == "compiled" else _pykernels


@contextmanager
def override(name: str | None):
    """Temporarily force a backend (not safe across threads)."""
    global _active
    previous = _active
    _active = _resolve(name)
    try:
        yield _active
    finally:
        _active = previous
