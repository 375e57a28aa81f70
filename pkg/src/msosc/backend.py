"""Kernel backend selection.

The compiled ``msosc._core`` extension is used when it imports; otherwise
the pure-Python kernels in :mod:`msosc._pure` take over.  Set
``MSOSC_BACKEND=python`` to force the fallback.
"""
import os

from . import _pure

KIND_PYTHON = _pure.KIND_PYTHON
KIND_LINEAR = _pure.KIND_LINEAR
KIND_SCHRODINGER = _pure.KIND_SCHRODINGER
KIND_NBODY = _pure.KIND_NBODY


def _load(name=None):
    name = (name or os.environ.get("MSOSC_BACKEND", "auto")).lower()
    if name in ("python", "pure"):
        return _pure
    try:
        from . import _core
    except ImportError:
        if name in ("cython", "compiled", "core"):
            raise
        return _pure
    return _core


_impl = _load()


def get(name=None):
    """Return the kernel module for ``name`` ("python", "cython" or auto)."""
    if name is None:
        return _impl
    return _load(name)


def active_name():
    return _impl.NAME


def compiled_available():
    try:
        from . import _core  # noqa: F401
    except ImportError:
        return False
    return True
