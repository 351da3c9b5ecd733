from ._backend import KERNEL_BACKEND
from .core import (
    AggregateReport,
    MetricConfig,
    SampleMetrics,
    adaptive_topk_binarize,
    aggregate,
    auc_from_ious,
    f_beta,
    iou,
    threshold_binarize,
)

__all__ = [
    "KERNEL_BACKEND",
    "AggregateReport",
    "MetricConfig",
    "SampleMetrics",
    "adaptive_topk_binarize",
    "aggregate",
    "auc_from_ious",
    "f_beta",
    "iou",
    "threshold_binarize",
]
