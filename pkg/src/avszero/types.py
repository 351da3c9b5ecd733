"""Core domain types: references, masks, score maps, samples, prediction records.

Masks and score maps are immutable wrappers around 2-D numpy arrays stored in
row-major order (shape = (height, width)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import RangeViolation


@dataclass(frozen=True)
class ImageRef:
    path: str
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True)
class AudioRef:
    path: str
    num_samples: int
    sample_rate: int

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("audio must contain at least one sample")


@dataclass(frozen=True)
class Mask:
    """Binary H x W bitmap. `bits` is a read-only uint8 array of {0,1}."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask bits must be 0 or 1")
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        """Number of set pixels."""
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool((self.bits == other.bits).all())

    @classmethod
    def from_flat(cls, width: int, height: int, bits) -> "Mask":
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} bits, got {arr.size}")
        return cls(arr.reshape(height, width))


@dataclass(frozen=True)
class ScoreMap:
    """Real-valued H x W relevance map with every score finite and in [0, 1]."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.scores, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"score map must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise RangeViolation("score map contains non-finite values")
        if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
            raise RangeViolation("score map values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "scores", arr)

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ScoreMap):
            return NotImplemented
        return self.scores.shape == other.scores.shape and bool((self.scores == other.scores).all())

    @classmethod
    def from_flat(cls, width: int, height: int, scores) -> "ScoreMap":
        arr = np.asarray(scores, dtype=np.float32)
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} scores, got {arr.size}")
        return cls(arr.reshape(height, width))


@dataclass(frozen=True)
class Sample:
    """One evaluation unit: an image, one audio clip, and the matching GT mask."""

    sample_id: str
    image: ImageRef
    audio: AudioRef
    gt_mask: str
    dataset_tag: str = ""


STRATEGY_NAMES = ("classification", "captioning", "inversion", "vcap_acls", "acap_vcls")


@dataclass
class PredictionRecord:
    """Per-sample pipeline trace produced by a strategy run."""

    sample_id: str
    strategy: str
    derived_text: str = ""
    embedding: Optional[np.ndarray] = None
    score_map: Optional[ScoreMap] = None
    ris_threshold: Optional[float] = None
    trace: Optional[dict] = None
    timings_ms: dict = field(default_factory=dict)
    error: Optional[str] = None

    def __post_init__(self):
        if self.strategy not in STRATEGY_NAMES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.error is None:
            if self.strategy == "inversion":
                if self.embedding is None:
                    raise ValueError("inversion records must carry an embedding handle")
            elif not self.derived_text:
                raise ValueError("text strategies require a non-empty derived_text")


def resample_mask_nearest(mask: Mask, width: int, height: int) -> Mask:
    """Nearest-neighbor resampling of a binary mask; preserves binarity exactly."""
    if mask.width == width and mask.height == height:
        return mask
    rows = np.floor((np.arange(height) + 0.5) * mask.height / height).astype(np.int64)
    cols = np.floor((np.arange(width) + 0.5) * mask.width / width).astype(np.int64)
    rows = np.clip(rows, 0, mask.height - 1)
    cols = np.clip(cols, 0, mask.width - 1)
    return Mask(mask.bits[np.ix_(rows, cols)])
