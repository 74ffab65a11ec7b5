"""Mask-restricted intensity extraction and linear [0,1] normalization.

Normalization is per volume: the rescale window comes from the masked
voxels only, either their min/max or a percentile pair for outlier-robust
behavior. Voxels outside the mask are zeroed, never rescaled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantIntensity, EmptyMask
from .grids import MaskVolume, Volume


@dataclass(frozen=True)
class MaskedVoxels:
    """Intensities at mask-true voxels, in grid index order."""

    values: np.ndarray
    source_dims: tuple[int, int, int]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size == 0:
            raise EmptyMask("masked voxel selection is empty")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class NormalizationMode:
    """How the rescale window is chosen: masked min/max or percentiles."""

    kind: str = "minmax"  # "minmax" | "percentile"
    p_lo: float = 0.5
    p_hi: float = 99.5

    def __post_init__(self):
        if self.kind not in ("minmax", "percentile"):
            raise ValueError(f"unknown normalization kind {self.kind!r}")
        if self.kind == "percentile" and not 0.0 <= self.p_lo < self.p_hi <= 100.0:
            raise ValueError(f"bad percentile pair ({self.p_lo}, {self.p_hi})")


MINMAX = NormalizationMode("minmax")


@dataclass(frozen=True)
class NormalizationRecord:
    """The applied linear map: lo -> 0, hi -> 1, clamped."""

    lo: float
    hi: float
    mode: NormalizationMode

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError(f"normalization window needs hi > lo, got [{self.lo}, {self.hi}]")


def apply_mask(v: Volume, m: MaskVolume) -> MaskedVoxels:
    """Intensities where the mask is true, in grid index order.

    Raises DimsMismatch if the grids disagree and EmptyMask for an all-false
    mask.
    """
    v.same_dims(m)
    if m.true_count == 0:
        raise EmptyMask("mask has no true voxels")
    return MaskedVoxels(v.data[m.flags], v.dims)


def normalize(
    v: Volume, m: MaskVolume, mode: NormalizationMode = MINMAX
) -> tuple[Volume, NormalizationRecord]:
    """Linearly rescale intensities so the masked window maps onto [0, 1].

    Every output voxel is clamp((in - lo) / (hi - lo), 0, 1); voxels outside
    the mask are set to 0. Raises ConstantIntensity when the masked window
    is empty of spread (lo == hi).
    """
    masked = apply_mask(v, m)
    if mode.kind == "minmax":
        lo = float(masked.values.min())
        hi = float(masked.values.max())
    else:
        lo, hi = (float(q) for q in np.percentile(masked.values, [mode.p_lo, mode.p_hi]))
    if hi == lo:
        raise ConstantIntensity(f"masked intensities give a degenerate window [{lo}, {hi}]")
    out = np.clip((v.data - lo) / (hi - lo), 0.0, 1.0)
    out[~m.flags] = 0.0
    return Volume(v.dims, v.spacing, out, meta=v.meta), NormalizationRecord(lo, hi, mode)
