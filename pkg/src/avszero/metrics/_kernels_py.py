"""Pure-numpy fallback for the compiled metric kernels.

Same contracts as ``_kernels.pyx``; used when the extension is unavailable or
when ``AVSZ_KERNELS=py`` forces it.
"""

from __future__ import annotations

import numpy as np

KERNEL_BACKEND = "python"


def overlap_counts(pred: np.ndarray, gt: np.ndarray):
    """Return (intersection, union, pred_count, gt_count) as Python ints."""
    inter = int(np.count_nonzero(pred & gt))
    union = int(np.count_nonzero(pred | gt))
    return inter, union, int(pred.sum(dtype=np.int64)), int(gt.sum(dtype=np.int64))


def topk_select(flat: np.ndarray, k: int) -> np.ndarray:
    """Flat selection mask of the k largest scores, ties broken by ascending index.

    Uses argpartition plus a row-major tie sweep; intentionally a different
    algorithm from the full-sort test oracle.
    """
    n = flat.shape[0]
    sel = np.zeros(n, dtype=np.uint8)
    if k == n:
        sel[:] = 1
        return sel
    part = np.argpartition(-flat, k - 1)[:k]
    pivot = flat[part].min()
    above = flat > pivot
    taken = int(np.count_nonzero(above))
    sel[above] = 1
    tie_idx = np.flatnonzero(flat == pivot)
    sel[tie_idx[: k - taken]] = 1
    return sel
