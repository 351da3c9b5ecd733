"""Segmentation metrics: IoU, F-beta, adaptive top-k and threshold binarization,
and the aggregate report (cIoU, AUC, mIoU, F-score, J, F).

Pixel counting stays in integer arithmetic until the final division so results
are exact for the oracle comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from ..errors import (
    DimensionMismatch,
    EmptyGT,
    EmptyInput,
    InvalidK,
    InvalidThreshold,
)
from ..types import Mask, ScoreMap
from ._backend import kernels


@dataclass(frozen=True)
class MetricConfig:
    beta_squared: float = 0.3
    auc_step: float = 0.05
    jf_threshold: float = 0.5
    ciou_strict: bool = True


@dataclass(frozen=True)
class SampleMetrics:
    sample_id: str
    iou_adaptive: float
    f_adaptive: float
    iou_thresholded: float
    f_thresholded: float

    def __post_init__(self):
        for name in ("iou_adaptive", "f_adaptive", "iou_thresholded", "f_thresholded"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} out of range: {v}")


@dataclass(frozen=True)
class AggregateReport:
    ciou: float
    auc: float
    miou: float
    fscore: float
    j: float
    f: float
    n_samples: int
    n_excluded: int = 0

    def to_dict(self) -> dict:
        return {
            "ciou": self.ciou,
            "auc": self.auc,
            "miou": self.miou,
            "fscore": self.fscore,
            "j": self.j,
            "f": self.f,
            "n_samples": self.n_samples,
            "n_excluded": self.n_excluded,
        }


def _check_pair(pred: Mask, gt: Mask) -> None:
    if (pred.width, pred.height) != (gt.width, gt.height):
        raise DimensionMismatch(
            f"pred {pred.width}x{pred.height} vs gt {gt.width}x{gt.height}"
        )
    if gt.count() == 0:
        raise EmptyGT("ground-truth mask has no set pixels")


def iou(pred: Mask, gt: Mask) -> float:
    """Intersection over union of two binary masks."""
    _check_pair(pred, gt)
    inter, union, _, _ = kernels.overlap_counts(pred.bits, gt.bits)
    return inter / union


def f_beta(pred: Mask, gt: Mask, beta_squared: float = 0.3) -> float:
    """Weighted F-measure of pixel precision and recall; 0 for empty predictions."""
    _check_pair(pred, gt)
    inter, _, pred_count, gt_count = kernels.overlap_counts(pred.bits, gt.bits)
    if pred_count == 0 or inter == 0:
        return 0.0
    precision = inter / pred_count
    recall = inter / gt_count
    return (1.0 + beta_squared) * precision * recall / (beta_squared * precision + recall)


def adaptive_topk_binarize(scores: ScoreMap, k: int) -> Mask:
    """Binarize by selecting the k highest-scoring pixels.

    Ties at the selection boundary are broken by ascending row-major index.
    """
    n = scores.width * scores.height
    if not 0 < k <= n:
        raise InvalidK(f"k={k} outside (0, {n}]")
    flat = np.ascontiguousarray(scores.scores.reshape(-1))
    sel = kernels.topk_select(flat, k)
    return Mask(np.asarray(sel, dtype=np.uint8).reshape(scores.height, scores.width))


def threshold_binarize(scores: ScoreMap, threshold: float) -> Mask:
    """Binarize by an inclusive score threshold (bit = 1 iff score >= threshold)."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidThreshold(f"threshold {threshold} outside [0, 1]")
    return Mask((scores.scores >= threshold).astype(np.uint8))


def auc_from_ious(ious: Sequence[float], step: float = 0.05) -> float:
    """Trapezoidal area under tau -> fraction(iou >= tau) over tau in [0, 1]."""
    taus = np.arange(0.0, 1.0 + step / 2, step)
    arr = np.asarray(ious, dtype=np.float64)
    success = np.array([(arr >= t).mean() for t in taus])
    return float(np.trapezoid(success, taus))


def aggregate(per_sample: List[SampleMetrics], config: MetricConfig = MetricConfig(),
              n_excluded: int = 0) -> AggregateReport:
    """Reduce per-sample metrics to the six report columns."""
    if not per_sample:
        raise EmptyInput("no per-sample metrics to aggregate")
    ious = [m.iou_adaptive for m in per_sample]
    n = len(per_sample)
    if config.ciou_strict:
        ciou = sum(1 for v in ious if v > 0.5) / n
    else:
        ciou = sum(1 for v in ious if v >= 0.5) / n
    return AggregateReport(
        ciou=ciou,
        auc=auc_from_ious(ious, config.auc_step),
        miou=float(np.mean(ious)),
        fscore=float(np.mean([m.f_adaptive for m in per_sample])),
        j=float(np.mean([m.iou_thresholded for m in per_sample])),
        f=float(np.mean([m.f_thresholded for m in per_sample])),
        n_samples=n,
        n_excluded=n_excluded,
    )
