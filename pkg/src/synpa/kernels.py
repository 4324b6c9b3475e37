"""Kernel backend selection.

The compiled extension is preferred; the pure-Python twin is used when the
extension is missing or ``SYNPA_PURE_PYTHON`` is set to a non-empty value
other than ``0``.
"""

from __future__ import annotations

import os

from synpa import _pykernels


def _load():
    if os.environ.get("SYNPA_PURE_PYTHON", "") not in ("", "0"):
        return _pykernels
    try:
        from synpa import _kernels
    except ImportError:
        return _pykernels
    return _kernels


_impl = _load()

BACKEND: str = _impl.BACKEND
max_weight_matching = _impl.max_weight_matching
invert_category = _impl.invert_category
slowdown_matrix = _impl.slowdown_matrix
stack_slowdown_matrix = _impl.stack_slowdown_matrix


def backends():
    """Return every importable kernel module, pure Python first."""
    mods = [_pykernels]
    try:
        from synpa import _kernels
    except ImportError:
        pass
    else:
        mods.append(_kernels)
    return mods
