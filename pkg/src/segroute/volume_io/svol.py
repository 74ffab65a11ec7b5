"""SVOL: a hand-writable test format for small volumes.

Layout: an ASCII header of ``key: value`` lines, one blank line, then the
raw payload. Required keys (any order):

    magic: SVOL1
    dims: 4 4 4
    spacing: 1.0 1.0 1.0
    kind: scalar | label | mask

The payload is little-endian float64 for scalar volumes and one byte per
voxel for labels and masks, in x-fastest order.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import IoFailure, MalformedHeader, NonFiniteData
from ..grids import LabelVolume, MaskVolume, Volume
from .nifti import build_label

MAGIC = "SVOL1"
_KINDS = {"scalar", "label", "mask"}
_REQUIRED = {"magic", "dims", "spacing", "kind"}


def read_svol(path) -> tuple[np.ndarray, tuple, tuple, str]:
    """Read an SVOL file; returns (values as float64, dims, spacing, stored kind)."""
    path = Path(path)
    blob = path.read_bytes()
    sep = blob.find(b"\n\n")
    if sep < 0:
        raise MalformedHeader(f"{path}: no blank line terminating the SVOL header")
    try:
        text = blob[:sep].decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedHeader(f"{path}: header is not ASCII") from exc

    fields = {}
    for line in text.splitlines():
        key, colon, value = line.partition(":")
        if not colon:
            raise MalformedHeader(f"{path}: header line {line!r} is not key: value")
        key = key.strip()
        if key in fields:
            raise MalformedHeader(f"{path}: duplicate header key {key!r}")
        fields[key] = value.strip()
    missing = _REQUIRED - fields.keys()
    if missing:
        raise MalformedHeader(f"{path}: missing header keys {sorted(missing)}")
    unknown = fields.keys() - _REQUIRED
    if unknown:
        raise MalformedHeader(f"{path}: unknown header keys {sorted(unknown)}")
    if fields["magic"] != MAGIC:
        raise MalformedHeader(f"{path}: bad magic {fields['magic']!r}")
    if fields["kind"] not in _KINDS:
        raise MalformedHeader(f"{path}: bad kind {fields['kind']!r}")

    try:
        dims = tuple(int(tok) for tok in fields["dims"].split())
        spacing = tuple(float(tok) for tok in fields["spacing"].split())
    except ValueError as exc:
        raise MalformedHeader(f"{path}: unparsable dims/spacing: {exc}") from exc
    if len(dims) != 3 or any(d <= 0 for d in dims):
        raise MalformedHeader(f"{path}: dims must be three positive integers, got {dims}")
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise MalformedHeader(f"{path}: spacing must be three positive floats, got {spacing}")

    kind = fields["kind"]
    count = dims[0] * dims[1] * dims[2]
    dtype = np.dtype("<f8") if kind == "scalar" else np.dtype("u1")
    payload = blob[sep + 2 :]
    if len(payload) != count * dtype.itemsize:
        raise MalformedHeader(
            f"{path}: payload is {len(payload)} bytes, expected {count * dtype.itemsize}"
        )
    values = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    return values, dims, spacing, kind


def load_scalar(path) -> Volume:
    values, dims, spacing, _ = read_svol(path)
    if not np.all(np.isfinite(values)):
        raise NonFiniteData(f"{path} contains NaN or infinite intensities")
    return Volume(dims, spacing, values)


def load_label(path) -> LabelVolume:
    values, dims, spacing, _ = read_svol(path)
    return build_label(values, dims, spacing, None, source=str(path))


def load_mask(path) -> MaskVolume:
    values, dims, spacing, _ = read_svol(path)
    if not np.all(np.isfinite(values)):
        raise NonFiniteData(f"{path} contains NaN or infinity in a mask payload")
    return MaskVolume(dims, spacing, values != 0)


def write_svol(grid, path) -> None:
    if isinstance(grid, Volume):
        kind, payload = "scalar", grid.data.astype("<f8").tobytes()
    elif isinstance(grid, LabelVolume):
        kind, payload = "label", grid.labels.astype("u1").tobytes()
    elif isinstance(grid, MaskVolume):
        kind, payload = "mask", grid.flags.astype("u1").tobytes()
    else:
        raise TypeError(f"cannot write {type(grid).__name__} as SVOL")
    header = (
        f"magic: {MAGIC}\n"
        f"dims: {grid.dims[0]} {grid.dims[1]} {grid.dims[2]}\n"
        f"spacing: {grid.spacing[0]!r} {grid.spacing[1]!r} {grid.spacing[2]!r}\n"
        f"kind: {kind}\n\n"
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
