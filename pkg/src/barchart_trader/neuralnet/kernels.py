"""Backend selection for the conv/pool kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels``. Set ``BARCHART_TRADER_KERNELS`` to
``python`` or ``cython`` to force one (``cython`` raises if unavailable).
"""
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels


def _select():
    wanted = os.environ.get("BARCHART_TRADER_KERNELS", "").strip().lower()
    if wanted:
        if wanted not in ("python", "cython"):
            raise ValueError(f"unknown kernel backend {wanted!r}")
        if wanted not in BACKENDS:
            raise ImportError("compiled kernels requested but _ckernels is not built")
        return BACKENDS[wanted]
    return BACKENDS.get("cython", _pykernels)


_backend = _select()
BACKEND = _backend.NAME


def use_backend(name):
    """Switch kernels at runtime (used by tests and the benchmark)."""
    global _backend, BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}")
    _backend = BACKENDS[name]
    BACKEND = name


def im2col3x3(x):
    return _backend.im2col3x3(np.ascontiguousarray(x, dtype=np.float64))


def col2im3x3(dcols, n, h, w, c):
    return _backend.col2im3x3(np.ascontiguousarray(dcols, dtype=np.float64), n, h, w, c)


def maxpool2x2(x):
    return _backend.maxpool2x2(np.ascontiguousarray(x, dtype=np.float64))


def maxpool2x2_backward(dout, argmax):
    return _backend.maxpool2x2_backward(
        np.ascontiguousarray(dout, dtype=np.float64), np.ascontiguousarray(argmax, dtype=np.uint8)
    )
