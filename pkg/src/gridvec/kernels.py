"""Backend selection for the pixel-loop kernels.

The compiled extension is preferred. Set ``GRIDVEC_BACKEND=python`` to force
the numpy fallback (useful for benchmarking and for debugging).
"""

import os

from gridvec import _pykernels

BACKEND = "python"

if os.environ.get("GRIDVEC_BACKEND", "").lower() != "python":
    try:
        from gridvec import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

fast_scores = _impl.fast_scores
nonmax_suppress = _impl.nonmax_suppress
hog_cells = _impl.hog_cells
lloyd_1d = _impl.lloyd_1d


def backend_module(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from gridvec import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
