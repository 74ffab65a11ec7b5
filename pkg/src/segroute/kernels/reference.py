"""NumPy implementations of the per-voxel kernels.

These are the import-time fallback when the compiled extension is absent and
the semantic reference the extension is tested against. Flat arrays are in
x-fastest order: ``index = x + nx * (y + ny * z)``.
"""

from __future__ import annotations

import numpy as np

# Variances below this floor are treated as exactly zero; cancellation noise
# in the E[x^2] - E[x]^2 form sits around 1e-16 for unit-range intensities.
VAR_FLOOR = 1e-12


def bin_counts(values: np.ndarray, bin_count: int, lo: float, hi: float) -> np.ndarray:
    """Histogram counts with out-of-range values clamped into the end bins.

    Bin of v is floor((v - lo) / (hi - lo) * B); v == hi lands in bin B - 1.
    """
    span = hi - lo
    idx = np.floor((values - lo) / span * bin_count)
    idx = np.clip(idx, 0, bin_count - 1).astype(np.int64)
    return np.bincount(idx, minlength=bin_count).astype(np.int64)


def _sum3(a: np.ndarray, axis: int) -> np.ndarray:
    """Sliding 3-window sum along one axis, truncated at the ends."""
    out = a.copy()
    lo_src = [slice(None)] * a.ndim
    lo_dst = [slice(None)] * a.ndim
    lo_src[axis] = slice(None, -1)
    lo_dst[axis] = slice(1, None)
    out[tuple(lo_dst)] += a[tuple(lo_src)]
    hi_src = [slice(None)] * a.ndim
    hi_dst = [slice(None)] * a.ndim
    hi_src[axis] = slice(1, None)
    hi_dst[axis] = slice(None, -1)
    out[tuple(hi_dst)] += a[tuple(hi_src)]
    return out


def local_mean_std(data: np.ndarray, dims: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Per-voxel mean and population std over the 3x3x3 neighborhood.

    The window is truncated at grid edges. Returns flat float64 arrays in the
    input's index order.
    """
    nx, ny, nz = dims
    # z-slowest C layout shares memory order with the x-fastest flat layout
    grid = np.asarray(data, dtype=np.float64).reshape(nz, ny, nx)
    s = grid
    ss = grid * grid
    cnt = np.ones_like(grid)
    for axis in range(3):
        s = _sum3(s, axis)
        ss = _sum3(ss, axis)
        cnt = _sum3(cnt, axis)
    mean = s / cnt
    var = ss / cnt - mean * mean
    var[var < VAR_FLOOR] = 0.0
    return mean.ravel(), np.sqrt(var)


def kmeans1d(
    values: np.ndarray, centers0: np.ndarray, max_iters: int, tol: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Lloyd's algorithm on 1-D data from fixed initial centers.

    Ties in the assignment step go to the lowest center index. Stops when the
    largest center movement drops below ``tol``, when an assignment pass
    leaves a cluster empty (caller decides whether that is an error), or
    after ``max_iters`` passes.

    Returns (centers, assignments, member counts, iterations used).
    """
    values = np.asarray(values, dtype=np.float64)
    centers = np.asarray(centers0, dtype=np.float64).copy()
    k = centers.size
    assign = np.zeros(values.size, dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    iters = 0
    for iters in range(1, max_iters + 1):
        assign = np.abs(values[:, None] - centers[None, :]).argmin(axis=1)
        counts = np.bincount(assign, minlength=k)
        if np.any(counts == 0):
            break
        sums = np.bincount(assign, weights=values, minlength=k)
        new_centers = sums / counts
        shift = np.max(np.abs(new_centers - centers))
        centers = new_centers
        if shift < tol:
            break
    return centers, assign, counts.astype(np.int64), iters


def confusion(
    pred: np.ndarray, gt: np.ndarray, mask: np.ndarray, class_id: int
) -> tuple[int, int, int, int]:
    """Masked TP/FP/FN/TN voxel counts for one class."""
    m = mask
    p = pred[m] == class_id
    g = gt[m] == class_id
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(np.count_nonzero(~p & ~g))
    return tp, fp, fn, tn
