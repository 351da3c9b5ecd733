"""Wire-protocol primitives: request parts, envelopes, AVSS codec, schemas.

This is the sidecar's own implementation of the protocol, kept independent of
the engine so the two sides can only agree by matching the documented wire
format, never by sharing code.
"""

from __future__ import annotations

import base64
import hashlib
import struct
from dataclasses import dataclass
from typing import Dict

import numpy as np

CAPABILITIES = (
    "audio_classify",
    "audio_caption",
    "image_caption",
    "audio_classify_openvocab",
    "image_classify_openvocab",
    "audio_embed",
    "ris_segment",
    "ris_segment_embedding",
)

_AVSS_MAGIC = b"AVSS"


class WireError(ValueError):
    """Malformed envelope, part, or body."""


@dataclass(frozen=True)
class Part:
    kind: str
    value: object


def parse_part(obj: dict) -> Part:
    kind = obj.get("kind")
    if kind == "binary":
        try:
            data = base64.b64decode(obj["b64"])
        except (KeyError, TypeError, ValueError) as exc:
            raise WireError(f"bad binary part: {exc}") from exc
        declared = obj.get("sha256")
        if declared and hashlib.sha256(data).hexdigest() != declared:
            raise WireError("binary part hash mismatch")
        return Part("binary", data)
    if kind == "text":
        if not isinstance(obj.get("value"), str):
            raise WireError("text part value must be a string")
        return Part("text", obj["value"])
    if kind == "strings":
        value = obj.get("value")
        if not isinstance(value, list) or any(not isinstance(s, str) for s in value):
            raise WireError("strings part value must be a list of strings")
        return Part("strings", list(value))
    if kind == "matrix":
        value = obj.get("value")
        try:
            rows = [[float(x) for x in row] for row in value]
        except (TypeError, ValueError) as exc:
            raise WireError(f"matrix part value must be rows of floats: {exc}") from exc
        if not rows or any(len(row) != len(rows[0]) for row in rows):
            raise WireError("matrix part must be non-empty and rectangular")
        return Part("matrix", rows)
    raise WireError(f"unknown part kind {kind!r}")


def parse_request(obj: object) -> tuple[str, str, Dict[str, Part]]:
    """Parse a request envelope into (capability, sample_id, payloads)."""
    if not isinstance(obj, dict):
        raise WireError("request envelope must be a JSON object")
    capability = obj.get("capability")
    if capability not in CAPABILITIES:
        raise WireError(f"unknown capability {capability!r}")
    payloads_obj = obj.get("payloads", {})
    if not isinstance(payloads_obj, dict):
        raise WireError("payloads must be an object")
    payloads = {name: parse_part(part) for name, part in payloads_obj.items()}
    return capability, str(obj.get("sample_id", "")), payloads


# Payload names each capability requires, with the expected part kind.
REQUIRED_PAYLOADS = {
    "audio_classify": {"audio": "binary"},
    "audio_caption": {"audio": "binary"},
    "image_caption": {"image": "binary"},
    "audio_classify_openvocab": {"audio": "binary", "candidates": "strings"},
    "image_classify_openvocab": {"image": "binary", "candidates": "strings"},
    "audio_embed": {"audio": "binary"},
    "ris_segment": {"image": "binary", "text": "text"},
    "ris_segment_embedding": {"image": "binary", "embeddings": "matrix"},
}


def check_payloads(capability: str, payloads: Dict[str, Part]) -> None:
    for name, kind in REQUIRED_PAYLOADS[capability].items():
        part = payloads.get(name)
        if part is None:
            raise WireError(f"{capability} requires a {name!r} payload")
        if part.kind != kind:
            raise WireError(f"{capability} payload {name!r} must be kind {kind!r}")


def encode_avss(scores: np.ndarray) -> bytes:
    arr = np.asarray(scores, dtype="<f4")
    if arr.ndim != 2:
        raise WireError("score map must be 2-D")
    height, width = arr.shape
    return _AVSS_MAGIC + struct.pack("<II", width, height) + arr.tobytes()


def decode_avss(data: bytes) -> np.ndarray:
    if len(data) < 12 or data[:4] != _AVSS_MAGIC:
        raise WireError("not an AVSS stream")
    width, height = struct.unpack_from("<II", data, 4)
    if width < 1 or height < 1:
        raise WireError(f"AVSS declares empty dimensions {width}x{height}")
    body = data[12:]
    if len(body) != width * height * 4:
        raise WireError(f"AVSS body has {len(body)} bytes, expected {width * height * 4}")
    arr = np.frombuffer(body, dtype="<f4").reshape(height, width)
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise WireError("AVSS scores must be finite and in [0, 1]")
    return arr.copy()


def scoremap_body(scores: np.ndarray) -> dict:
    return {"score_map_b64": base64.b64encode(encode_avss(scores)).decode("ascii")}


def validate_body(capability: str, body: dict, payloads: Dict[str, Part]) -> None:
    """Validate a response body against its capability schema; raises WireError.

    The conformance runner uses this to check live responses against the same
    rules the engine enforces.
    """
    if capability == "audio_classify":
        ranking = body.get("ranking")
        if not isinstance(ranking, list):
            raise WireError("ranking must be a list")
        for entry in ranking:
            if (not isinstance(entry, list) or len(entry) != 2
                    or not isinstance(entry[0], str) or not entry[0]
                    or not isinstance(entry[1], (int, float))):
                raise WireError(f"bad ranking entry: {entry!r}")
    elif capability in ("audio_caption", "image_caption"):
        if not isinstance(body.get("caption"), str):
            raise WireError("caption must be a string")
    elif capability in ("audio_classify_openvocab", "image_classify_openvocab"):
        scores = body.get("scores")
        candidates = payloads["candidates"].value
        if (not isinstance(scores, list)
                or any(not isinstance(x, (int, float)) or isinstance(x, bool) for x in scores)):
            raise WireError("scores must be a list of numbers")
        if len(scores) != len(candidates):
            raise WireError(f"{len(scores)} scores for {len(candidates)} candidates")
    elif capability == "audio_embed":
        embedding = body.get("embedding")
        if (not isinstance(embedding, list) or not embedding
                or any(not isinstance(x, (int, float)) for x in embedding)):
            raise WireError("embedding must be a non-empty list of numbers")
    elif capability in ("ris_segment", "ris_segment_embedding"):
        try:
            raw = base64.b64decode(body["score_map_b64"])
        except (KeyError, TypeError, ValueError) as exc:
            raise WireError(f"missing or invalid score_map_b64: {exc}") from exc
        decode_avss(raw)
    else:  # pragma: no cover - CAPABILITIES and schemas are kept in sync
        raise WireError(f"no schema for {capability!r}")
