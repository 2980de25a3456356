"""Kernel backend selection.

The compiled Cython core is preferred when it imported cleanly; otherwise
the pure numpy/scipy backend takes over. Both produce bit-identical
results, so the choice only affects speed. Set ``TURBSEG_BACKEND=python``
or ``=compiled`` to force one (forcing an unavailable backend raises).
"""

import os

from . import py_backend

_requested = os.environ.get("TURBSEG_BACKEND", "").strip().lower()
if _requested not in ("", "python", "compiled", "cython"):
    raise ImportError(f"unknown TURBSEG_BACKEND value {_requested!r}")

_impl = None
if _requested in ("", "compiled", "cython"):
    try:
        from . import _core as _impl
    except ImportError:
        if _requested:
            raise ImportError("compiled kernel backend requested but not built")
        _impl = None
if _impl is None:
    _impl = py_backend

BACKEND = "python" if _impl is py_backend else "compiled"

vibe_step_kernel = _impl.vibe_step_kernel
block_match_level = _impl.block_match_level
label_components = _impl.label_components

NBR8 = py_backend.NBR8
NBR9 = py_backend.NBR9
