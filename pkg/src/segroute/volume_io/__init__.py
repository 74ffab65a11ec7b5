"""Volume file I/O: NIfTI-1 (.nii) and the hand-writable SVOL (.svol) format.

``load_volume`` and ``write_volume`` dispatch on the file extension. The
requested ``kind`` decides the returned grid type and its validation: label
loads reject non-integral or out-of-range values, mask loads treat any
nonzero voxel as inside the mask.
"""

from __future__ import annotations

from pathlib import Path

from ..grids import GridType, LabelVolume, MaskVolume, Volume
from . import nifti, svol

KINDS = ("scalar", "label", "mask")


def _format_for(path: Path):
    ext = path.suffix.lower()
    if ext == ".nii":
        return nifti
    if ext == ".svol":
        return svol
    raise ValueError(f"unsupported volume extension {ext!r} (expected .nii or .svol)")


def load_volume(path, kind: str) -> GridType:
    """Load a grid of the requested kind ('scalar', 'label' or 'mask')."""
    path = Path(path)
    fmt = _format_for(path)
    if not path.exists():
        raise FileNotFoundError(f"no such volume file: {path}")
    if kind == "scalar":
        return fmt.load_scalar(path)
    if kind == "label":
        return fmt.load_label(path)
    if kind == "mask":
        return fmt.load_mask(path)
    raise ValueError(f"unknown kind {kind!r}, expected one of {KINDS}")


def write_volume(grid: GridType, path) -> None:
    """Write a grid to disk; the format is chosen by the path's extension."""
    path = Path(path)
    fmt = _format_for(path)
    if fmt is nifti:
        nifti.write_nifti(grid, path)
    else:
        svol.write_svol(grid, path)


__all__ = [
    "KINDS",
    "LabelVolume",
    "MaskVolume",
    "Volume",
    "load_volume",
    "write_volume",
]
