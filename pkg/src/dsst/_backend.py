"""Kernel backend selection.

The compiled extension is used when importable; set ``DSST_BACKEND=python``
to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

_requested = os.environ.get("DSST_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "compiled"):
    raise ImportError(f"unknown DSST_BACKEND {_requested!r}")
if _requested == "compiled" and _ckernels is None:
    raise ImportError("DSST_BACKEND=compiled but dsst._ckernels is not built")

NAME = _requested or ("compiled" if _ckernels is not None else "python")
kernels = BACKENDS[NAME]


def get(name=None):
    """Return the kernel module for `name` (default: the active backend)."""
    if name is None:
        return kernels
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available") from None
