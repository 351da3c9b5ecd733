"""Mask and score-map codecs.

Masks: single-channel PNG (pixel > 127 maps to 1) or the raw AVSM format
(magic ``AVSM``, u32 width, u32 height, then width*height bytes of {0,1}).
Score maps: the raw AVSS format (magic ``AVSS``, u32 width, u32 height, then
row-major little-endian float32 values in [0, 1]).
"""

from __future__ import annotations

import struct

import numpy as np
from PIL import Image

from .errors import DecodeError, RangeViolation, UnsupportedFormat
from .types import Mask, ScoreMap

_AVSM_MAGIC = b"AVSM"
_AVSS_MAGIC = b"AVSS"


def decode_mask(path: str) -> Mask:
    """Decode a GT or prediction mask from PNG or raw AVSM."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(4)
            if head == _AVSM_MAGIC:
                return _decode_avsm(head + fh.read())
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    try:
        with Image.open(path) as im:
            if im.mode not in ("1", "L", "I", "I;16", "P"):
                raise UnsupportedFormat(f"{path}: mode {im.mode} is not single-channel")
            arr = np.asarray(im.convert("L"))
    except UnsupportedFormat:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    return Mask((arr > 127).astype(np.uint8))


def encode_mask(mask: Mask, path: str) -> None:
    """Write a mask; .png paths get an 8-bit PNG (0/255), others raw AVSM."""
    if path.endswith(".png"):
        Image.fromarray(mask.bits * np.uint8(255), mode="L").save(path)
    else:
        with open(path, "wb") as fh:
            fh.write(_AVSM_MAGIC)
            fh.write(struct.pack("<II", mask.width, mask.height))
            fh.write(mask.bits.tobytes())


def _decode_avsm(data: bytes) -> Mask:
    if len(data) < 12:
        raise DecodeError("AVSM stream truncated before header")
    width, height = struct.unpack_from("<II", data, 4)
    if width < 1 or height < 1:
        raise DecodeError(f"AVSM declares empty dimensions {width}x{height}")
    body = data[12:]
    if len(body) != width * height:
        raise DecodeError(f"AVSM body has {len(body)} bytes, expected {width * height}")
    arr = np.frombuffer(body, dtype=np.uint8)
    if not np.isin(arr, (0, 1)).all():
        raise DecodeError("AVSM body contains values outside {0,1}")
    return Mask(arr.reshape(height, width).copy())


def encode_scoremap(score_map: ScoreMap) -> bytes:
    """Serialize a score map to the AVSS wire format (lossless for float32)."""
    header = _AVSS_MAGIC + struct.pack("<II", score_map.width, score_map.height)
    return header + score_map.scores.astype("<f4").tobytes()


def decode_scoremap(data: bytes) -> ScoreMap:
    """Parse an AVSS byte stream, rejecting truncation and out-of-range values."""
    if len(data) < 12 or data[:4] != _AVSS_MAGIC:
        raise DecodeError("not an AVSS stream")
    width, height = struct.unpack_from("<II", data, 4)
    if width < 1 or height < 1:
        raise DecodeError(f"AVSS declares empty dimensions {width}x{height}")
    body = data[12:]
    expected = width * height * 4
    if len(body) != expected:
        raise DecodeError(f"AVSS body has {len(body)} bytes, expected {expected}")
    arr = np.frombuffer(body, dtype="<f4").reshape(height, width)
    if not np.isfinite(arr).all():
        raise RangeViolation("AVSS stream contains non-finite scores")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise RangeViolation("AVSS scores must lie in [0, 1]")
    return ScoreMap(arr.copy())


def write_scoremap(score_map: ScoreMap, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_scoremap(score_map))


def read_scoremap(path: str) -> ScoreMap:
    try:
        with open(path, "rb") as fh:
            return decode_scoremap(fh.read())
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
