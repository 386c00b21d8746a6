"""Pick the compiled kernels when available, the numpy ones otherwise."""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("SAFEPERF_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

iid_block = _impl.iid_block
markov_block = _impl.markov_block


def backend_module(name: str | None = None):
    """Kernel module by name ("cython" / "python"); ``None`` gives the default."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def backend_name(module) -> str:
    return "python" if module is _pykernels else "cython"
