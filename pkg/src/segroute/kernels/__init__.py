"""Hot per-voxel kernels with a compiled core and a NumPy fallback.

The compiled extension is preferred when importable; set the environment
variable ``SEGROUTE_FORCE_PYTHON=1`` to force the NumPy implementations.
``BACKEND`` reports which one is active. Both implement the same contracts
(see ``reference`` for the authoritative docstrings) and are cross-checked
in the test suite and compared in ``benchmarks/bench_kernels.py``.
"""

import os

import numpy as np

from . import reference

if os.environ.get("SEGROUTE_FORCE_PYTHON", "") not in ("", "0"):
    _impl = reference
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "python"


def bin_counts(values, bin_count, lo, hi):
    values = np.ascontiguousarray(values, dtype=np.float64)
    return _impl.bin_counts(values, int(bin_count), float(lo), float(hi))


def local_mean_std(data, dims):
    data = np.ascontiguousarray(data, dtype=np.float64)
    return _impl.local_mean_std(data, tuple(int(d) for d in dims))


def kmeans1d(values, centers0, max_iters, tol):
    values = np.ascontiguousarray(values, dtype=np.float64)
    centers0 = np.ascontiguousarray(centers0, dtype=np.float64)
    return _impl.kmeans1d(values, centers0, int(max_iters), float(tol))


def confusion(pred, gt, mask, class_id):
    if _impl is reference:
        return reference.confusion(pred, gt, mask, class_id)
    pred = np.ascontiguousarray(pred, dtype=np.uint8)
    gt = np.ascontiguousarray(gt, dtype=np.uint8)
    mask = np.ascontiguousarray(mask).view(np.uint8)
    return _impl.confusion(pred, gt, mask, int(class_id))
