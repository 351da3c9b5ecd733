"""Per-sample metric computation tying score maps to GT masks."""

from __future__ import annotations

from typing import List, Optional, Tuple

from . import maskio
from .errors import MissingGT, NoValidSamples
from .metrics import (
    AggregateReport,
    MetricConfig,
    SampleMetrics,
    adaptive_topk_binarize,
    aggregate,
    f_beta,
    iou,
    threshold_binarize,
)
from .types import Mask, Sample, ScoreMap, resample_mask_nearest


def compute_sample_metrics(
    sample_id: str,
    score_map: ScoreMap,
    gt: Mask,
    ris_threshold: float = 0.5,
    config: MetricConfig = MetricConfig(),
) -> Optional[SampleMetrics]:
    """Metrics for one sample, or None when the GT is empty (excluded).

    GT masks are resampled (nearest-neighbor) to the score-map resolution when
    dimensions differ.
    """
    gt = resample_mask_nearest(gt, score_map.width, score_map.height)
    k = gt.count()
    if k == 0:
        return None
    adaptive = adaptive_topk_binarize(score_map, k)
    thresholded = threshold_binarize(score_map, ris_threshold)
    return SampleMetrics(
        sample_id=sample_id,
        iou_adaptive=iou(adaptive, gt),
        f_adaptive=f_beta(adaptive, gt, config.beta_squared),
        iou_thresholded=iou(thresholded, gt),
        f_thresholded=f_beta(thresholded, gt, config.beta_squared),
    )


def evaluate_predictions(
    entries: List[Tuple[str, ScoreMap, float]],
    samples_by_id: dict,
    config: MetricConfig = MetricConfig(),
    jf_threshold_override: Optional[float] = None,
) -> Tuple[AggregateReport, List[SampleMetrics]]:
    """Evaluate (sample_id, score_map, ris_threshold) triples against GT masks."""
    per_sample: List[SampleMetrics] = []
    n_excluded = 0
    for sample_id, score_map, ris_threshold in entries:
        sample: Sample = samples_by_id.get(sample_id)
        if sample is None:
            raise MissingGT(f"prediction {sample_id!r} has no manifest entry")
        try:
            gt = maskio.decode_mask(sample.gt_mask)
        except Exception as exc:
            raise MissingGT(f"{sample_id}: cannot decode GT mask: {exc}") from exc
        threshold = jf_threshold_override if jf_threshold_override is not None else ris_threshold
        metrics = compute_sample_metrics(sample_id, score_map, gt, threshold, config)
        if metrics is None:
            n_excluded += 1
            continue
        per_sample.append(metrics)
    if not per_sample:
        raise NoValidSamples("every sample was excluded or failed")
    return aggregate(per_sample, config, n_excluded=n_excluded), per_sample
