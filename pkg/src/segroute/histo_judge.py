"""Masked-intensity histograms, peak extraction, and the routing judgement.

A volume is routed by three tests on the two highest-intensity histogram
peaks (x in bin units, y in counts, x_N = number of bins B):

    rule 1:  x_n - x_{n-1} > separation threshold   (default 1/B)
    rule 2:  y_n >= height_ratio * y_{n-1}          (default 0.8)
    rule 3:  x_n <= position_ratio * x_N            (default 0.8)

All three passing routes the volume to the first backend ("skilled A");
anything else, including degenerate histograms with fewer than two peaks,
falls through to the second.

The default separation threshold is the literal 1/x_N with the abscissa in
bin units, which any two distinct integer bins satisfy: it is effectively a
"peaks are distinct" test. A stricter separation (in bins) is one config
field away.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BadRange, BadWindow, EmptyInput
from .preprocess import MaskedVoxels


@dataclass(frozen=True)
class Histogram:
    """Binned counts over a fixed intensity range."""

    bin_count: int
    range: tuple[float, float]
    counts: np.ndarray
    total: float
    smoothed: bool = False

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64).copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.size != self.bin_count:
            raise ValueError(f"{counts.size} counts for {self.bin_count} bins")


@dataclass(frozen=True)
class Peak:
    """A local maximum: bin index x and count y."""

    x: int
    y: float

    def __post_init__(self):
        if self.y <= 0:
            raise ValueError(f"peak height must be positive, got {self.y}")


@dataclass(frozen=True)
class PeakSet:
    """Peaks in strictly ascending bin order."""

    peaks: tuple[Peak, ...]

    def __post_init__(self):
        xs = [p.x for p in self.peaks]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"peak positions must be strictly increasing, got {xs}")
        object.__setattr__(self, "peaks", tuple(self.peaks))

    @property
    def n(self) -> int:
        return len(self.peaks)


@dataclass(frozen=True)
class JudgementConfig:
    """Histogram shape and rule thresholds for the routing decision.

    ``separation_threshold`` is in bin units; None means the literal default
    1 / bin_count.
    """

    bin_count: int = 128
    smoothing_window: int = 5
    min_prominence: float = 0.01
    height_ratio: float = 0.8
    position_ratio: float = 0.8
    separation_threshold: float | None = None

    def __post_init__(self):
        if self.bin_count < 2:
            raise ValueError("bin_count must be at least 2")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing_window must be odd and >= 1")
        if not 0 < self.height_ratio <= 1:
            raise ValueError("height_ratio must be in (0, 1]")
        if not 0 < self.position_ratio <= 1:
            raise ValueError("position_ratio must be in (0, 1]")
        if self.min_prominence < 0:
            raise ValueError("min_prominence must be nonnegative")
        if self.separation_threshold is not None and self.separation_threshold < 0:
            raise ValueError("separation_threshold must be nonnegative")

    @property
    def resolved_separation(self) -> float:
        if self.separation_threshold is None:
            return 1.0 / self.bin_count
        return self.separation_threshold


class Target(enum.Enum):
    """Which backend a volume is dispatched to."""

    SKILLED_A = "skilled_a"
    SKILLED_B = "skilled_b"


@dataclass(frozen=True)
class RuleCheck:
    """One rule's outcome with the operands that were compared."""

    passed: bool
    lhs: float
    rhs: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class RoutingDecision:
    """Routing target plus rule-by-rule diagnostics."""

    target: Target
    rule1: RuleCheck
    rule2: RuleCheck
    rule3: RuleCheck
    peakset: PeakSet
    degenerate: bool
    config: JudgementConfig = field(compare=False, default=JudgementConfig())

    def __post_init__(self):
        should_route_a = (
            not self.degenerate
            and self.rule1.passed
            and self.rule2.passed
            and self.rule3.passed
        )
        if (self.target is Target.SKILLED_A) != should_route_a:
            raise ValueError("target inconsistent with rule outcomes")

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "target": self.target.value,
            "degenerate": self.degenerate,
            "rules": {
                "separation": self.rule1.to_dict(),
                "height": self.rule2.to_dict(),
                "position": self.rule3.to_dict(),
            },
            "peaks": [{"x": p.x, "y": p.y} for p in self.peakset.peaks],
            "thresholds": {
                "bin_count": cfg.bin_count,
                "smoothing_window": cfg.smoothing_window,
                "min_prominence": cfg.min_prominence,
                "height_ratio": cfg.height_ratio,
                "position_ratio": cfg.position_ratio,
                "separation_threshold": cfg.resolved_separation,
            },
        }


def build_histogram(mv: MaskedVoxels, bin_count: int, vrange: tuple[float, float]) -> Histogram:
    """Bin masked intensities over a fixed range.

    Value v lands in bin floor((v - lo) / (hi - lo) * B); v == hi goes to the
    last bin, and out-of-range values are clamped into the end bins, so the
    counts always sum to the number of masked voxels.
    """
    lo, hi = float(vrange[0]), float(vrange[1])
    if not hi > lo:
        raise BadRange(f"histogram range needs hi > lo, got [{lo}, {hi}]")
    if bin_count < 1:
        raise BadRange(f"bin_count must be positive, got {bin_count}")
    values = mv.values
    if values.size == 0:
        raise EmptyInput("no masked voxels to bin")
    counts = kernels.bin_counts(values, bin_count, lo, hi)
    return Histogram(bin_count, (lo, hi), counts, total=float(values.size))


def smooth_histogram(h: Histogram, window: int) -> Histogram:
    """Centered moving average; edge bins average the in-range window part."""
    if window < 1 or window % 2 == 0 or window > h.bin_count:
        raise BadWindow(f"window must be odd and within [1, {h.bin_count}], got {window}")
    if window == 1:
        smoothed = h.counts
    else:
        kernel = np.ones(window)
        sums = np.convolve(h.counts, kernel, mode="same")
        spans = np.convolve(np.ones_like(h.counts), kernel, mode="same")
        smoothed = sums / spans
    return Histogram(h.bin_count, h.range, smoothed, total=h.total, smoothed=True)


def _prominence(counts: np.ndarray, k: int) -> float:
    """Topographic prominence: height above the higher of the two side bases.

    Each side's base is the minimum between the peak and the nearest
    strictly higher bin (or the signal edge). A boundary peak has only one
    side; a single-bin histogram has none and its peak keeps full height.
    """
    height = counts[k]
    n = counts.size
    bases = []
    if k > 0:
        side_min = height
        i = k - 1
        while i >= 0 and counts[i] <= height:
            side_min = min(side_min, counts[i])
            i -= 1
        bases.append(side_min)
    if k < n - 1:
        side_min = height
        i = k + 1
        while i < n and counts[i] <= height:
            side_min = min(side_min, counts[i])
            i += 1
        bases.append(side_min)
    if not bases:
        return float(height)
    return float(height - max(bases))


def detect_peaks(h: Histogram, min_prominence: float = 0.01) -> PeakSet:
    """Local maxima with prominence at least min_prominence * max(counts).

    Bin k is a candidate iff counts[k] > counts[k-1] and
    counts[k] >= counts[k+1]; boundary bins use the available side only, and
    plateaus contribute their leftmost bin. An empty PeakSet is valid output.
    """
    counts = h.counts
    n = counts.size
    floor = min_prominence * float(counts.max()) if n else 0.0
    peaks = []
    for k in range(n):
        rising = k == 0 or counts[k] > counts[k - 1]
        falling = k == n - 1 or counts[k] >= counts[k + 1]
        if not (rising and falling) or counts[k] <= 0:
            continue
        if _prominence(counts, k) >= floor:
            peaks.append(Peak(k, float(counts[k])))
    return PeakSet(tuple(peaks))


def judge(ps: PeakSet, cfg: JudgementConfig = JudgementConfig()) -> RoutingDecision:
    """Evaluate the three routing rules on the two highest-intensity peaks.

    Fewer than two peaks is degenerate and routes to skilled B. Never fails:
    every peak set yields exactly one target.
    """
    x_n_max = float(cfg.bin_count)
    if ps.n < 2:
        peak = ps.peaks[-1] if ps.n else None
        x = float(peak.x) if peak else 0.0
        y = float(peak.y) if peak else 0.0
        return RoutingDecision(
            target=Target.SKILLED_B,
            rule1=RuleCheck(False, 0.0, cfg.resolved_separation),
            rule2=RuleCheck(False, y, cfg.height_ratio * y),
            rule3=RuleCheck(x <= cfg.position_ratio * x_n_max, x, cfg.position_ratio * x_n_max),
            peakset=ps,
            degenerate=True,
            config=cfg,
        )
    prev, last = ps.peaks[-2], ps.peaks[-1]
    rule1 = RuleCheck(
        float(last.x - prev.x) > cfg.resolved_separation,
        float(last.x - prev.x),
        cfg.resolved_separation,
    )
    rule2 = RuleCheck(last.y >= cfg.height_ratio * prev.y, last.y, cfg.height_ratio * prev.y)
    rule3 = RuleCheck(
        float(last.x) <= cfg.position_ratio * x_n_max,
        float(last.x),
        cfg.position_ratio * x_n_max,
    )
    routed_a = rule1.passed and rule2.passed and rule3.passed
    return RoutingDecision(
        target=Target.SKILLED_A if routed_a else Target.SKILLED_B,
        rule1=rule1,
        rule2=rule2,
        rule3=rule3,
        peakset=ps,
        degenerate=False,
        config=cfg,
    )
