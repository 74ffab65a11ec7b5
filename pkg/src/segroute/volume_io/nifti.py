"""NIfTI-1 single-file reader and writer.

Supports the 348-byte header with magic ``n+1\\0`` (payload in the same file
at ``vox_offset``) and ``ni1\\0`` (payload in a sibling ``.img`` file). Both
byte orders are read; the native order is written. Orientation fields
(qform/sform) are carried through a round-trip untouched but never
interpreted.

Supported datatype codes: 2 (uint8), 4 (int16), 8 (int32), 16 (float32),
64 (float64). Anything else raises UnsupportedDatatype rather than casting
silently. ``.nii.gz`` is out of scope: decompress first.
"""

from __future__ import annotations

import math
import struct
import sys
from pathlib import Path

import numpy as np

from ..errors import (
    IoFailure,
    LabelOutOfRange,
    MalformedHeader,
    NonFiniteData,
    UnsupportedDatatype,
)
from ..grids import LabelVolume, MaskVolume, NiftiMeta, Volume

HEADER_SIZE = 348
MAGIC_SINGLE = b"n+1\x00"
MAGIC_PAIR = b"ni1\x00"

# struct layout of the fixed NIfTI-1 header (byte-order prefix prepended)
_HDR_FMT = (
    "i"  # sizeof_hdr
    "10s18sih2B"  # data_type, db_name, extents, session_error, regular, dim_info
    "8h"  # dim
    "3f"  # intent_p1..p3
    "hhhh"  # intent_code, datatype, bitpix, slice_start
    "8f"  # pixdim
    "fff"  # vox_offset, scl_slope, scl_inter
    "hBB"  # slice_end, slice_code, xyzt_units
    "ffff"  # cal_max, cal_min, slice_duration, toffset
    "ii"  # glmax, glmin
    "80s24s"  # descrip, aux_file
    "hh"  # qform_code, sform_code
    "3f3f"  # quatern_b..d, qoffset_x..z
    "4f4f4f"  # srow_x, srow_y, srow_z
    "16s4s"  # intent_name, magic
)

_DTYPES = {2: "u1", 4: "i2", 8: "i4", 16: "f4", 64: "f8"}

assert struct.calcsize("<" + _HDR_FMT) == HEADER_SIZE


def _native_prefix() -> str:
    return "<" if sys.byteorder == "little" else ">"


def _detect_order(raw: bytes) -> str:
    for prefix in ("<", ">"):
        if struct.unpack_from(prefix + "i", raw, 0)[0] == HEADER_SIZE:
            return prefix
    got = struct.unpack_from(_native_prefix() + "i", raw, 0)[0]
    raise MalformedHeader(
        f"sizeof_hdr is {got} under both byte orders (expected {HEADER_SIZE})"
    )


class _Header:
    """Decoded header fields needed for reading the payload."""

    def __init__(self, raw: bytes, order: str):
        fields = struct.unpack(order + _HDR_FMT, raw)
        self.order = order
        self.dim = fields[7:15]
        self.datatype = fields[19]
        self.bitpix = fields[20]
        self.pixdim = fields[22:30]
        self.vox_offset = fields[30]
        self.scl_slope = fields[31]
        self.scl_inter = fields[32]
        self.qform_code = fields[44]
        self.sform_code = fields[45]
        self.quatern = fields[46:49]
        self.qoffset = fields[49:52]
        self.srow_x = fields[52:56]
        self.srow_y = fields[56:60]
        self.srow_z = fields[60:64]
        self.magic = fields[65]


def _read_header(path: Path) -> tuple[_Header, bytes]:
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise MalformedHeader(f"cannot read {path}: {exc}") from exc
    if len(blob) < HEADER_SIZE:
        raise MalformedHeader(f"{path} holds {len(blob)} bytes, header needs {HEADER_SIZE}")
    order = _detect_order(blob)
    hdr = _Header(blob[:HEADER_SIZE], order)
    if hdr.magic not in (MAGIC_SINGLE, MAGIC_PAIR):
        raise MalformedHeader(f"bad magic {hdr.magic!r}")
    if hdr.dim[0] != 3:
        raise MalformedHeader(f"dim[0] must be 3 for a 3-D volume, got {hdr.dim[0]}")
    if any(d < 1 for d in hdr.dim[1:4]):
        raise MalformedHeader(f"non-positive dims {hdr.dim[1:4]}")
    if hdr.datatype not in _DTYPES:
        raise UnsupportedDatatype(f"datatype code {hdr.datatype} not supported")
    expected_bits = np.dtype(_DTYPES[hdr.datatype]).itemsize * 8
    if hdr.bitpix != expected_bits:
        raise MalformedHeader(
            f"bitpix {hdr.bitpix} inconsistent with datatype {hdr.datatype}"
        )
    if any(p <= 0 or not math.isfinite(p) for p in hdr.pixdim[1:4]):
        raise MalformedHeader(f"non-positive pixdim {hdr.pixdim[1:4]}")
    return hdr, blob


def read_nifti(path) -> tuple[np.ndarray, tuple, tuple, NiftiMeta, float, float]:
    """Read raw (unscaled) payload and geometry from a NIfTI-1 file.

    Returns (raw float64 array in x-fastest order, dims, spacing, meta,
    scl_slope, scl_inter).
    """
    path = Path(path)
    hdr, blob = _read_header(path)
    dims = tuple(int(d) for d in hdr.dim[1:4])
    count = dims[0] * dims[1] * dims[2]
    dtype = np.dtype(hdr.order + _DTYPES[hdr.datatype])

    if hdr.magic == MAGIC_SINGLE:
        offset = int(hdr.vox_offset)
        if offset < HEADER_SIZE:
            raise MalformedHeader(f"vox_offset {offset} overlaps the header")
        payload_src = blob
    else:
        img = path.with_suffix(".img")
        try:
            payload_src = img.read_bytes()
        except FileNotFoundError:
            raise MalformedHeader(f"ni1 header {path} has no companion {img.name}")
        offset = int(hdr.vox_offset)
        if offset < 0:
            raise MalformedHeader(f"negative vox_offset {offset}")

    need = offset + count * dtype.itemsize
    if len(payload_src) < need:
        raise MalformedHeader(
            f"payload truncated: need {need} bytes, file has {len(payload_src)}"
        )
    raw = np.frombuffer(payload_src, dtype=dtype, count=count, offset=offset)
    raw = raw.astype(np.float64)

    spacing = tuple(float(p) for p in hdr.pixdim[1:4])
    meta = NiftiMeta(
        qform_code=int(hdr.qform_code),
        sform_code=int(hdr.sform_code),
        quatern=tuple(float(v) for v in hdr.quatern),
        qoffset=tuple(float(v) for v in hdr.qoffset),
        srow_x=tuple(float(v) for v in hdr.srow_x),
        srow_y=tuple(float(v) for v in hdr.srow_y),
        srow_z=tuple(float(v) for v in hdr.srow_z),
    )
    return raw, dims, spacing, meta, float(hdr.scl_slope), float(hdr.scl_inter)


def load_scalar(path) -> Volume:
    raw, dims, spacing, meta, slope, inter = read_nifti(path)
    if slope == 0.0 or not math.isfinite(slope):
        slope = 1.0
    if not math.isfinite(inter):
        inter = 0.0
    data = raw * slope + inter
    if not np.all(np.isfinite(data)):
        raise NonFiniteData(f"{path} contains NaN or infinite intensities")
    return Volume(dims, spacing, data, meta=meta)


def load_label(path) -> LabelVolume:
    raw, dims, spacing, meta, _, _ = read_nifti(path)
    return build_label(raw, dims, spacing, meta, source=str(path))


def build_label(raw, dims, spacing, meta, source="payload", remap=None) -> LabelVolume:
    """Validate raw values as tissue labels, optionally remapping them first."""
    if not np.all(np.isfinite(raw)):
        raise NonFiniteData(f"{source} contains NaN or infinity in a label payload")
    as_int = raw.astype(np.int64)
    if not np.array_equal(as_int, raw):
        raise LabelOutOfRange(f"{source} contains non-integral label values")
    if remap is not None:
        out = np.full(as_int.shape, -1, dtype=np.int64)
        for src, dst in remap.items():
            out[as_int == src] = dst
        unmapped = as_int[out < 0]
        if unmapped.size:
            raise LabelOutOfRange(
                f"{source} contains label value {int(unmapped[0])} missing from the remap table"
            )
        as_int = out
    if as_int.size and (as_int.min() < 0 or as_int.max() > 3):
        bad = as_int[(as_int < 0) | (as_int > 3)][0]
        raise LabelOutOfRange(f"{source} contains label value {int(bad)} outside {{0..3}}")
    return LabelVolume(dims, spacing, as_int, meta=meta)


def load_mask(path) -> MaskVolume:
    raw, dims, spacing, meta, _, _ = read_nifti(path)
    if not np.all(np.isfinite(raw)):
        raise NonFiniteData(f"{path} contains NaN or infinity in a mask payload")
    return MaskVolume(dims, spacing, raw != 0, meta=meta)


def _payload_for_write(grid) -> tuple[np.ndarray, int]:
    """Grid payload as the on-disk array plus its NIfTI datatype code."""
    if isinstance(grid, Volume):
        return grid.data.astype(np.float32), 16
    if isinstance(grid, LabelVolume):
        return grid.labels.astype(np.uint8), 2
    if isinstance(grid, MaskVolume):
        return grid.flags.astype(np.uint8), 2
    raise TypeError(f"cannot write {type(grid).__name__} as NIfTI")


def write_nifti(grid, path) -> None:
    """Write a grid as single-file NIfTI-1 in native byte order.

    Scalars become float32, labels and masks 8-bit unsigned; scl_slope is 1
    and scl_inter 0 so a round-trip applies no rescale.
    """
    payload, datatype = _payload_for_write(grid)
    order = _native_prefix()
    meta = grid.meta or NiftiMeta()
    dims = grid.dims
    header = struct.pack(
        order + _HDR_FMT,
        HEADER_SIZE,
        b"", b"", 0, 0, ord("r"), 0,
        3, dims[0], dims[1], dims[2], 1, 1, 1, 1,
        0.0, 0.0, 0.0,
        0,  # intent_code
        datatype,
        payload.dtype.itemsize * 8,
        0,  # slice_start
        1.0, grid.spacing[0], grid.spacing[1], grid.spacing[2], 0.0, 0.0, 0.0, 0.0,
        352.0, 1.0, 0.0,
        0, 0, 2,  # slice_end, slice_code, xyzt_units (mm)
        0.0, 0.0, 0.0, 0.0,
        0, 0,
        b"", b"",
        meta.qform_code, meta.sform_code,
        *meta.quatern, *meta.qoffset,
        *meta.srow_x, *meta.srow_y, *meta.srow_z,
        b"", MAGIC_SINGLE,
    )
    body = payload.astype(payload.dtype.newbyteorder(order)).tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(b"\x00\x00\x00\x00")  # extender: no extensions
            fh.write(body)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
