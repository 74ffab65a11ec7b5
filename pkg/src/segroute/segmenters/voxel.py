"""Trainable voxel classifier and its multi-class soft-Dice objective.

The model is a linear map from four per-voxel features (normalized
intensity, 3x3x3 neighborhood mean, 3x3x3 neighborhood standard deviation,
constant bias) to four class scores, squashed by softmax. Training is
full-batch gradient descent on the soft-Dice loss

    loss = 4 - sum_i (2 * sum pred_i * gt_i + eps) / (sum pred_i + sum gt_i + eps)

with the sums over masked voxels and i running over all four classes,
background included. Label reconstruction takes the per-voxel argmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import BadEpsilon, DimsMismatch, NonFiniteLoss
from ..grids import N_CLASSES, LabelVolume, MaskVolume, Volume

FEATURE_COUNT = 4
ALL_CLASSES = (0, 1, 2, 3)


@dataclass(frozen=True)
class ModelParams:
    """Per-class linear weights over the 4-feature voxel descriptor."""

    weights: np.ndarray  # shape (classes, features)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (N_CLASSES, FEATURE_COUNT):
            raise ValueError(f"weights must be {(N_CLASSES, FEATURE_COUNT)}, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def to_dict(self) -> dict:
        return {
            "class_count": N_CLASSES,
            "feature_count": FEATURE_COUNT,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelParams":
        return cls(np.asarray(payload["weights"], dtype=np.float64))


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings; loss_classes selects which class Dice
    terms enter the objective (all four by default)."""

    learning_rate: float = 0.1
    epochs: int = 200
    epsilon: float = 1e-6
    seed: int = 0
    loss_classes: tuple[int, ...] = ALL_CLASSES

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.epsilon <= 0:
            raise BadEpsilon("epsilon must be positive")
        if not self.loss_classes or any(c not in ALL_CLASSES for c in self.loss_classes):
            raise ValueError(f"loss_classes must be a nonempty subset of {ALL_CLASSES}")


@dataclass(frozen=True)
class TrainResult:
    """Trained parameters plus the per-epoch loss trajectory (length epochs + 1)."""

    params: ModelParams
    loss_trajectory: tuple[float, ...]


@dataclass(frozen=True)
class SoftPrediction:
    """Per-voxel class probabilities; rows sum to 1."""

    dims: tuple[int, int, int]
    probs: np.ndarray  # shape (voxels, classes)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        n = self.dims[0] * self.dims[1] * self.dims[2]
        if probs.shape != (n, N_CLASSES):
            raise ValueError(f"probs must be {(n, N_CLASSES)}, got {probs.shape}")
        sums = probs.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9) or np.any(probs < 0):
            raise ValueError("per-voxel probabilities must be nonnegative and sum to 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def voxel_features(v: Volume) -> np.ndarray:
    """The (voxels, 4) feature matrix: intensity, local mean, local std, bias.

    Neighborhood statistics come from the full grid (out-of-mask voxels are
    expected to be zeroed by preprocessing) with windows truncated at edges.
    """
    mean, std = kernels.local_mean_std(v.data, v.dims)
    return np.column_stack([v.data, mean, std, np.ones(v.voxel_count)])


def _one_hot(labels: np.ndarray) -> np.ndarray:
    out = np.zeros((labels.size, N_CLASSES))
    out[np.arange(labels.size), labels] = 1.0
    return out


def _soft_dice(probs, onehot, epsilon, loss_classes=ALL_CLASSES):
    """Loss and d(loss)/d(probs) for masked (voxels, classes) arrays."""
    inter = (probs * onehot).sum(axis=0)
    num = 2.0 * inter + epsilon
    den = probs.sum(axis=0) + onehot.sum(axis=0) + epsilon
    cls = np.asarray(loss_classes)
    loss = float(len(cls) - (num[cls] / den[cls]).sum())
    grad = np.zeros_like(probs)
    grad[:, cls] = -(2.0 * onehot[:, cls] * den[cls] - num[cls]) / (den[cls] ** 2)
    return loss, grad


def soft_dice_loss(
    pred: SoftPrediction | np.ndarray,
    gt: LabelVolume,
    m: MaskVolume,
    epsilon: float = 1e-6,
    loss_classes: tuple[int, ...] = ALL_CLASSES,
) -> tuple[float, np.ndarray]:
    """Soft-Dice loss over masked voxels and its per-voxel, per-class gradient.

    ``pred`` may be a SoftPrediction or a raw (voxels, classes) array (not
    necessarily normalized, which finite-difference probing needs). The
    returned gradient matches pred's full shape; out-of-mask rows are zero.
    """
    if epsilon <= 0:
        raise BadEpsilon(f"epsilon must be positive, got {epsilon}")
    probs = pred.probs if isinstance(pred, SoftPrediction) else np.asarray(pred, dtype=np.float64)
    if isinstance(pred, SoftPrediction) and pred.dims != gt.dims:
        raise DimsMismatch(f"dims {pred.dims} != {gt.dims}")
    gt.same_dims(m)
    if probs.shape != (gt.voxel_count, N_CLASSES):
        raise ValueError(f"pred shape {probs.shape} != {(gt.voxel_count, N_CLASSES)}")
    flags = m.flags
    loss, grad_masked = _soft_dice(
        probs[flags], _one_hot(gt.labels[flags]), epsilon, loss_classes
    )
    grad = np.zeros_like(probs)
    grad[flags] = grad_masked
    return loss, grad


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def train_voxel_classifier(
    examples, cfg: TrainConfig = TrainConfig()
) -> TrainResult:
    """Fit the linear-softmax voxel model by full-batch gradient descent.

    ``examples`` is a nonempty sequence of (Volume, MaskVolume, LabelVolume)
    with matching dims per item; the objective is the mean of the
    per-example soft-Dice losses. Deterministic given cfg.seed.
    """
    examples = list(examples)
    if not examples:
        raise ValueError("need at least one training example")
    batches = []
    for v, m, gt in examples:
        v.same_dims(m)
        v.same_dims(gt)
        flags = m.flags
        feats = voxel_features(v)[flags]
        batches.append((feats, _one_hot(gt.labels[flags])))

    rng = np.random.default_rng(cfg.seed)
    weights = rng.normal(0.0, 0.01, size=(N_CLASSES, FEATURE_COUNT))

    def batch_pass(w):
        total_loss = 0.0
        grad_w = np.zeros_like(w)
        for feats, onehot in batches:
            probs = _softmax(feats @ w.T)
            loss, dprobs = _soft_dice(probs, onehot, cfg.epsilon, cfg.loss_classes)
            total_loss += loss
            # chain through softmax: ds_j = p_j * (dp_j - sum_i dp_i p_i)
            inner = (dprobs * probs).sum(axis=1, keepdims=True)
            dscores = probs * (dprobs - inner)
            grad_w += dscores.T @ feats
        k = len(batches)
        return total_loss / k, grad_w / k

    trajectory = []
    loss, grad = batch_pass(weights)
    trajectory.append(loss)
    for _ in range(cfg.epochs):
        weights = weights - cfg.learning_rate * grad
        if not np.all(np.isfinite(weights)):
            raise NonFiniteLoss("weights diverged; lower the learning rate")
        loss, grad = batch_pass(weights)
        if not np.isfinite(loss):
            raise NonFiniteLoss("loss diverged; lower the learning rate")
        trajectory.append(loss)
    return TrainResult(ModelParams(weights), tuple(trajectory))


def predict_voxel_classifier(
    params: ModelParams, v: Volume, m: MaskVolume
) -> tuple[SoftPrediction, LabelVolume]:
    """Class probabilities and argmax labels, same dims as the input.

    Masked voxels get softmax probabilities with argmax labels (ties break
    toward the smaller class index); out-of-mask voxels are background with
    probabilities (1, 0, 0, 0).
    """
    v.same_dims(m)
    flags = m.flags
    probs = np.zeros((v.voxel_count, N_CLASSES))
    probs[:, 0] = 1.0
    feats = voxel_features(v)[flags]
    masked_probs = _softmax(feats @ params.weights.T)
    probs[flags] = masked_probs
    labels = np.zeros(v.voxel_count, dtype=np.uint8)
    labels[flags] = masked_probs.argmax(axis=1)
    return SoftPrediction(v.dims, probs), LabelVolume(v.dims, v.spacing, labels)
