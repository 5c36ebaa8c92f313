"""Kernel selection: the Cython extension when importable, numpy otherwise.

Set ``MDSPIR_BACKEND=python`` to force the numpy kernels.
"""

from __future__ import annotations

import contextlib
import importlib
import os
from types import ModuleType

_NAMES = {"cython": "mdspir._kernels", "python": "mdspir._pykernels"}


def load(name: str) -> ModuleType:
    return importlib.import_module(_NAMES[name])


def available() -> list[str]:
    out = []
    for name in _NAMES:
        try:
            load(name)
        except ImportError:
            continue
        out.append(name)
    return out


def _select() -> tuple[str, ModuleType]:
    forced = os.environ.get("MDSPIR_BACKEND", "").strip().lower()
    if forced in ("python", "py", "numpy", "fallback"):
        return "python", load("python")
    try:
        return "cython", load("cython")
    except ImportError:
        if forced == "cython":
            raise
        return "python", load("python")


NAME, kernels = _select()


@contextlib.contextmanager
def use(name: str):
    """Temporarily route every kernel call through backend ``name``."""
    global NAME, kernels
    saved = NAME, kernels
    NAME, kernels = name, load(name)
    try:
        yield kernels
    finally:
        NAME, kernels = saved
