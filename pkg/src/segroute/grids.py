"""Shared 3-D grid types: scalar volumes, tissue-label volumes, brain masks.

All grids store their payload as a flat 1-D array in x-fastest order, i.e.
``index = x + nx * (y + ny * z)``. Grids are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimsMismatch, LabelOutOfRange, NonFiniteData

N_CLASSES = 4  # background, CSF, GM, WM
TISSUE_CLASSES = (1, 2, 3)
CLASS_NAMES = {0: "background", 1: "csf", 2: "gm", 3: "wm"}


def _check_dims(dims) -> tuple[int, int, int]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d <= 0 for d in dims):
        raise ValueError(f"dims must be three positive voxel counts, got {dims!r}")
    return dims


def _check_spacing(spacing) -> tuple[float, float, float]:
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise ValueError(f"spacing must be three positive lengths, got {spacing!r}")
    return spacing


@dataclass(frozen=True)
class NiftiMeta:
    """Orientation fields carried through a NIfTI round-trip, never interpreted."""

    qform_code: int = 0
    sform_code: int = 0
    quatern: tuple[float, float, float] = (0.0, 0.0, 0.0)
    qoffset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    srow_x: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    srow_y: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    srow_z: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)


class _Grid:
    """Mixin with the geometry shared by all three grid types."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]

    @property
    def voxel_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def flat_index(self, x: int, y: int, z: int) -> int:
        nx, ny, nz = self.dims
        if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
            raise IndexError(f"voxel ({x},{y},{z}) outside dims {self.dims}")
        return x + nx * (y + ny * z)

    def _payload(self) -> np.ndarray:
        raise NotImplementedError

    def at(self, x: int, y: int, z: int):
        """Value at voxel (x, y, z)."""
        return self._payload()[self.flat_index(x, y, z)]

    def as_array(self) -> np.ndarray:
        """Payload as a read-only (nx, ny, nz) view, x varying fastest."""
        return self._payload().reshape(self.dims, order="F")

    def same_dims(self, other: "_Grid") -> None:
        if self.dims != other.dims:
            raise DimsMismatch(f"dims {self.dims} != {other.dims}")

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and self.dims == other.dims
            and self.spacing == other.spacing
            and np.array_equal(self._payload(), other._payload())
        )

    def __hash__(self):
        return hash((type(self).__name__, self.dims, self.spacing))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Volume(_Grid):
    """Scalar intensity grid. Intensities are finite float64."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    data: np.ndarray
    meta: NiftiMeta | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", _check_dims(self.dims))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))
        data = _freeze(np.asarray(self.data, dtype=np.float64).ravel())
        if data.size != self.voxel_count:
            raise ValueError(
                f"data length {data.size} != nx*ny*nz = {self.voxel_count}"
            )
        if not np.all(np.isfinite(data)):
            raise NonFiniteData("volume contains NaN or infinite intensities")
        object.__setattr__(self, "data", data)

    def _payload(self) -> np.ndarray:
        return self.data


@dataclass(frozen=True, eq=False)
class LabelVolume(_Grid):
    """Tissue label grid: 0 background, 1 CSF, 2 GM, 3 WM."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    labels: np.ndarray
    meta: NiftiMeta | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", _check_dims(self.dims))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))
        raw = np.asarray(self.labels).ravel()
        if raw.size != self.voxel_count:
            raise ValueError(
                f"labels length {raw.size} != nx*ny*nz = {self.voxel_count}"
            )
        as_int = raw.astype(np.int64, copy=False) if raw.dtype.kind in "iub" else None
        if as_int is None:
            if not np.all(np.isfinite(raw)):
                raise NonFiniteData("label payload contains NaN or infinity")
            as_int = raw.astype(np.int64)
            if not np.array_equal(as_int, raw):
                raise LabelOutOfRange("label payload contains non-integral values")
        if as_int.size and (as_int.min() < 0 or as_int.max() > 3):
            bad = as_int[(as_int < 0) | (as_int > 3)][0]
            raise LabelOutOfRange(f"label value {bad} outside {{0..3}}")
        object.__setattr__(self, "labels", _freeze(as_int.astype(np.uint8)))

    def _payload(self) -> np.ndarray:
        return self.labels


@dataclass(frozen=True, eq=False)
class MaskVolume(_Grid):
    """Boolean brain-mask grid; true marks voxels inside the mask."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    flags: np.ndarray
    meta: NiftiMeta | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "dims", _check_dims(self.dims))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))
        flags = np.asarray(self.flags).ravel()
        if flags.size != self.voxel_count:
            raise ValueError(
                f"flags length {flags.size} != nx*ny*nz = {self.voxel_count}"
            )
        if flags.dtype != np.bool_:
            if flags.dtype.kind == "f" and not np.all(np.isfinite(flags)):
                raise NonFiniteData("mask payload contains NaN or infinity")
            flags = flags != 0
        object.__setattr__(self, "flags", _freeze(flags))

    def _payload(self) -> np.ndarray:
        return self.flags

    @property
    def true_count(self) -> int:
        return int(np.count_nonzero(self.flags))


GridType = Volume | LabelVolume | MaskVolume
