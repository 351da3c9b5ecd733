"""Dataset manifest ingestion and sample validation.

A manifest is newline-delimited JSON, one record per line, with required keys
``sample_id``, ``image``, ``audio``, ``gt_mask`` and optional ``dataset_tag``.
All paths are resolved relative to the manifest's directory.
"""

from __future__ import annotations

import json
import os
from typing import List

from PIL import Image

from . import maskio
from .errors import DuplicateId, MissingFile, ParseError
from .types import AudioRef, ImageRef, Sample

_REQUIRED_KEYS = ("sample_id", "image", "audio", "gt_mask")


def _probe_image_size(path: str):
    try:
        with Image.open(path) as im:
            return im.size  # (width, height)
    except OSError:
        return None


def load_manifest(path: str, strict: bool = False) -> List[Sample]:
    """Parse a manifest file into validated Samples, preserving line order.

    With ``strict=True`` every referenced asset must exist on disk.
    """
    base = os.path.dirname(os.path.abspath(path))
    samples: List[Sample] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed record: {exc}") from exc
            if not isinstance(rec, dict):
                raise ParseError(f"{path}:{lineno}: record is not an object")
            missing = [k for k in _REQUIRED_KEYS if k not in rec]
            if missing:
                raise ParseError(f"{path}:{lineno}: missing keys {missing}")
            sid = str(rec["sample_id"])
            if sid in seen:
                raise DuplicateId(f"{path}:{lineno}: duplicate sample_id {sid!r}")
            seen.add(sid)

            image_path = os.path.join(base, rec["image"])
            audio_path = os.path.join(base, rec["audio"])
            gt_path = os.path.join(base, rec["gt_mask"])
            if strict:
                for p in (image_path, audio_path, gt_path):
                    if not os.path.exists(p):
                        raise MissingFile(f"{path}:{lineno}: missing asset {p}")

            size = None
            if "width" in rec and "height" in rec:
                size = (int(rec["width"]), int(rec["height"]))
            elif os.path.exists(image_path):
                size = _probe_image_size(image_path)
            width, height = size if size else (1, 1)

            samples.append(
                Sample(
                    sample_id=sid,
                    image=ImageRef(path=image_path, width=width, height=height),
                    audio=AudioRef(
                        path=audio_path,
                        num_samples=int(rec.get("num_samples", 1)),
                        sample_rate=int(rec.get("sample_rate", 16000)),
                    ),
                    gt_mask=gt_path,
                    dataset_tag=str(rec.get("dataset_tag", "")),
                )
            )
    return samples


def validate_sample(sample: Sample) -> List[str]:
    """Return warnings for a sample without mutating it; never raises.

    Flags empty GT masks (excluded from metric aggregation) and dimension
    mismatches between the GT mask and the image.
    """
    warnings: List[str] = []
    if not os.path.exists(sample.gt_mask):
        warnings.append(f"{sample.sample_id}: GT mask file missing: {sample.gt_mask}")
        return warnings
    try:
        gt = maskio.decode_mask(sample.gt_mask)
    except Exception as exc:
        warnings.append(f"{sample.sample_id}: GT mask unreadable: {exc}")
        return warnings
    if gt.count() == 0:
        warnings.append(f"{sample.sample_id}: empty GT; excluded from metrics")
    if (gt.width, gt.height) != (sample.image.width, sample.image.height):
        warnings.append(
            f"{sample.sample_id}: GT {gt.width}x{gt.height} does not match "
            f"image {sample.image.width}x{sample.image.height}"
        )
    return warnings
