"""Intensity k-means reference backend.

Three clusters over the masked 1-D intensities, Lloyd iterations from
quantile-initialized centers, converged clusters relabeled in ascending
mean order as CSF (1), GM (2), WM (3). Quantile init makes the whole
backend deterministic: no seed enters the computation.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DegenerateClustering
from ..grids import LabelVolume, MaskVolume, Volume

_INIT_QUANTILES = (1.0 / 6.0, 3.0 / 6.0, 5.0 / 6.0)


def segment_kmeans(
    v: Volume, m: MaskVolume, max_iters: int = 100, tol: float = 1e-6
) -> LabelVolume:
    """Cluster masked intensities into the three tissue labels.

    Raises DegenerateClustering when fewer than three distinct masked
    intensities exist or an assignment pass empties a cluster.
    """
    v.same_dims(m)
    values = v.data[m.flags]
    if np.unique(values).size < 3:
        raise DegenerateClustering(
            "need at least 3 distinct masked intensities for 3 clusters"
        )
    centers0 = np.quantile(values, _INIT_QUANTILES)
    centers, assign, counts, _ = kernels.kmeans1d(values, centers0, max_iters, tol)
    if np.any(counts == 0):
        raise DegenerateClustering("a cluster emptied during Lloyd iteration")
    # ascending-mean clusters get labels 1 (CSF), 2 (GM), 3 (WM)
    order = np.argsort(centers, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(1, centers.size + 1)
    labels = np.zeros(v.voxel_count, dtype=np.uint8)
    labels[m.flags] = rank[assign]
    return LabelVolume(v.dims, v.spacing, labels)
