"""avszero: zero-shot audiovisual segmentation pipeline engine.

Composes interchangeable model backends (over a small wire protocol) into
five audio-to-text bridging strategies feeding a referring image segmentation
backend, plus the full segmentation metric suite for evaluating the results.
"""

__version__ = "0.1.0"

from .types import (
    AudioRef,
    ImageRef,
    Mask,
    PredictionRecord,
    Sample,
    ScoreMap,
)

__all__ = [
    "__version__",
    "AudioRef",
    "ImageRef",
    "Mask",
    "PredictionRecord",
    "Sample",
    "ScoreMap",
]
