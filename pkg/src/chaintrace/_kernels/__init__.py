"""Graph kernel backend selection.

The compiled extension (_speedups, built from Cython) is preferred when
importable; otherwise the pure-Python twin (_pure) is used.  Override with
the CHAINTRACE_KERNELS environment variable: "auto" (default), "native",
or "pure".  Both backends return bit-identical results.
"""
from __future__ import annotations

import os
from types import ModuleType

BACKEND_ENV = "CHAINTRACE_KERNELS"


def load_backend(name: str) -> ModuleType:
    """Return the kernel module for an explicit backend name."""
    if name == "pure":
        from . import _pure

        return _pure
    if name == "native":
        from . import _speedups  # type: ignore[attr-defined]

        return _speedups
    raise ValueError(f"unknown kernel backend {name!r}")


def _select() -> tuple[ModuleType, str]:
    choice = os.environ.get(BACKEND_ENV, "auto")
    if choice in ("native", "pure"):
        return load_backend(choice), choice
    if choice != "auto":
        raise ValueError(f"{BACKEND_ENV} must be auto, native, or pure (got {choice!r})")
    try:
        return load_backend("native"), "native"
    except ImportError:
        return load_backend("pure"), "pure"


_impl, BACKEND = _select()

taint_bfs = _impl.taint_bfs
hop_bfs = _impl.hop_bfs
cospend_union = _impl.cospend_union

__all__ = ["BACKEND", "BACKEND_ENV", "cospend_union", "hop_bfs", "load_backend", "taint_bfs"]
