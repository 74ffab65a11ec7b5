"""Segmenter backends: anything that maps (Volume, MaskVolume) -> LabelVolume.

Three concrete kinds ship here: intensity k-means, the trainable voxel
classifier, and an external command. A backend spec is one of the three
dataclasses below; ``run_segmenter`` dispatches on the type.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass, replace

from ..errors import UntrainedModel
from ..grids import LabelVolume, MaskVolume, Volume
from .external import segment_external
from .kmeans import segment_kmeans
from .voxel import (
    ModelParams,
    SoftPrediction,
    TrainConfig,
    TrainResult,
    predict_voxel_classifier,
    soft_dice_loss,
    train_voxel_classifier,
    voxel_features,
)


@dataclass(frozen=True)
class KMeansSpec:
    """Intensity k-means over 3 tissue clusters; quantile init, no seed used."""

    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0

    def describe(self) -> str:
        return "kmeans"


@dataclass(frozen=True)
class VoxelClassifierSpec:
    """Trainable voxel classifier; params is None until trained."""

    train: TrainConfig = TrainConfig()
    params: ModelParams | None = None

    def describe(self) -> str:
        return "voxel_classifier"

    def trained(self, params: ModelParams) -> "VoxelClassifierSpec":
        return replace(self, params=params)


@dataclass(frozen=True)
class ExternalSpec:
    """External command backend; see external.segment_external for the contract."""

    command: str
    io_format: str = "nii"
    timeout: float = 60.0

    def describe(self) -> str:
        return f"external({self.command})"


SegmenterSpec = KMeansSpec | VoxelClassifierSpec | ExternalSpec


def run_segmenter(
    spec: SegmenterSpec, v: Volume, m: MaskVolume, workdir=None
) -> LabelVolume:
    """Run whichever backend the spec describes on one volume."""
    if isinstance(spec, KMeansSpec):
        return segment_kmeans(v, m, max_iters=spec.max_iters, tol=spec.tol)
    if isinstance(spec, VoxelClassifierSpec):
        if spec.params is None:
            raise UntrainedModel("voxel classifier has no trained parameters")
        _, labels = predict_voxel_classifier(spec.params, v, m)
        return labels
    if isinstance(spec, ExternalSpec):
        if workdir is None:
            workdir = tempfile.mkdtemp(prefix="segroute-ext-")
        return segment_external(
            spec.command, v, m, workdir, io_format=spec.io_format, timeout=spec.timeout
        )
    raise TypeError(f"unknown segmenter spec {type(spec).__name__}")


__all__ = [
    "ExternalSpec",
    "KMeansSpec",
    "ModelParams",
    "SegmenterSpec",
    "SoftPrediction",
    "TrainConfig",
    "TrainResult",
    "VoxelClassifierSpec",
    "predict_voxel_classifier",
    "run_segmenter",
    "segment_external",
    "segment_kmeans",
    "soft_dice_loss",
    "train_voxel_classifier",
    "voxel_features",
]
