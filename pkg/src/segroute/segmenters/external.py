"""External-command backend: hand volumes to any segmenter over files.

Contract: the command template carries {input}, {mask} and {output}
placeholders, the process reads the first two paths, writes a label volume
to the third, and exits 0. stdout/stderr are captured into diagnostics on
failure.
"""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from ..errors import BackendTimeout, CommandFailed, OutputMissing
from ..grids import LabelVolume, MaskVolume, Volume
from ..volume_io import load_volume, write_volume

PLACEHOLDERS = ("{input}", "{mask}", "{output}")


def segment_external(
    command: str,
    v: Volume,
    m: MaskVolume,
    workdir,
    io_format: str = "nii",
    timeout: float = 60.0,
) -> LabelVolume:
    """Run one external segmentation command in ``workdir``.

    Raises CommandFailed (nonzero exit), BackendTimeout, OutputMissing,
    DimsMismatch (wrong output shape) or LabelOutOfRange (bad output values).
    """
    for placeholder in PLACEHOLDERS:
        if placeholder not in command:
            raise ValueError(f"command template lacks the {placeholder} placeholder")
    if io_format not in ("nii", "svol"):
        raise ValueError(f"io_format must be 'nii' or 'svol', got {io_format!r}")

    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    ext = "." + io_format
    input_path = workdir / f"input{ext}"
    mask_path = workdir / f"mask{ext}"
    output_path = workdir / f"output{ext}"
    write_volume(v, input_path)
    write_volume(m, mask_path)

    rendered = command.format(
        input=str(input_path), mask=str(mask_path), output=str(output_path)
    )
    argv = shlex.split(rendered)
    try:
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=timeout, cwd=workdir
        )
    except subprocess.TimeoutExpired as exc:
        raise BackendTimeout(f"backend exceeded {timeout}s: {rendered}") from exc
    except OSError as exc:
        raise CommandFailed(f"cannot launch backend: {exc}") from exc
    if proc.returncode != 0:
        raise CommandFailed(
            f"backend exited {proc.returncode}: {rendered}",
            returncode=proc.returncode,
            stdout=proc.stdout,
            stderr=proc.stderr,
        )
    if not output_path.exists():
        raise OutputMissing(f"backend exited 0 but wrote no {output_path}")
    labels = load_volume(output_path, "label")
    v.same_dims(labels)
    return labels
