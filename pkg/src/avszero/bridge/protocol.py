"""Capability wire protocol: envelopes, canonical hashing, schema validation.

Requests and responses are single JSON objects; binary parts (image/audio
bytes, AVSS score maps) travel base64-encoded with a sha256 content hash.
See docs/protocol.md for byte-level examples.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, Optional

from .. import maskio
from ..errors import SchemaViolation
from ..types import ScoreMap

CAPABILITIES = (
    "audio_classify",
    "audio_caption",
    "image_caption",
    "audio_classify_openvocab",
    "image_classify_openvocab",
    "audio_embed",
    "ris_segment",
    "ris_segment_embedding",
    "text_encode_grad",
    "nlp_chunk",
)

OPTIONAL_CAPABILITIES = ("text_encode_grad", "nlp_chunk")


@dataclass(frozen=True)
class Part:
    """One named payload part. kind: text | binary | strings | matrix."""

    kind: str
    value: object

    def content_hash(self) -> str:
        if self.kind == "binary":
            return hashlib.sha256(self.value).hexdigest()
        blob = json.dumps(self.value, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_wire(self) -> dict:
        if self.kind == "binary":
            return {
                "kind": "binary",
                "b64": base64.b64encode(self.value).decode("ascii"),
                "sha256": self.content_hash(),
            }
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def from_wire(cls, obj: dict) -> "Part":
        kind = obj.get("kind")
        if kind == "binary":
            data = base64.b64decode(obj["b64"])
            declared = obj.get("sha256")
            if declared and hashlib.sha256(data).hexdigest() != declared:
                raise SchemaViolation("binary part hash mismatch")
            return cls("binary", data)
        if kind in ("text", "strings", "matrix"):
            return cls(kind, obj["value"])
        raise SchemaViolation(f"unknown part kind {kind!r}")


def text_part(value: str) -> Part:
    return Part("text", value)


def binary_part(value: bytes) -> Part:
    return Part("binary", value)


def strings_part(values) -> Part:
    return Part("strings", list(values))


def matrix_part(rows) -> Part:
    return Part("matrix", [[float(x) for x in row] for row in rows])


@dataclass(frozen=True)
class CapabilityRequest:
    capability: str
    sample_id: str
    payloads: Dict[str, Part] = field(default_factory=dict)

    def __post_init__(self):
        if self.capability not in CAPABILITIES:
            raise SchemaViolation(f"unknown capability {self.capability!r}")

    def fingerprint_parts(self) -> Dict[str, str]:
        """Canonicalized payload hashes, invariant under part ordering."""
        return {name: part.content_hash() for name, part in sorted(self.payloads.items())}

    def to_wire(self) -> dict:
        return {
            "capability": self.capability,
            "sample_id": self.sample_id,
            "payloads": {name: part.to_wire() for name, part in self.payloads.items()},
        }

    @classmethod
    def from_wire(cls, obj: dict) -> "CapabilityRequest":
        try:
            payloads = {name: Part.from_wire(p) for name, p in obj.get("payloads", {}).items()}
            return cls(capability=obj["capability"], sample_id=obj.get("sample_id", ""),
                       payloads=payloads)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed request envelope: {exc}") from exc

    def text(self) -> Optional[str]:
        part = self.payloads.get("text")
        return part.value if part is not None and part.kind == "text" else None


@dataclass(frozen=True)
class CapabilityResponse:
    status: str  # "ok" | "error"
    body: dict = field(default_factory=dict)
    error_message: str = ""

    def to_wire(self) -> dict:
        if self.status == "ok":
            return {"status": "ok", "body": self.body}
        return {"status": "error", "error_message": self.error_message}

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_wire(), sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_wire(cls, obj: dict) -> "CapabilityResponse":
        if not isinstance(obj, dict):
            raise SchemaViolation("response envelope must be a JSON object")
        status = obj.get("status")
        if status == "ok":
            body = obj.get("body")
            if not isinstance(body, dict):
                raise SchemaViolation("ok response missing body object")
            return cls("ok", body=body)
        if status == "error":
            return cls("error", error_message=str(obj.get("error_message", "")))
        raise SchemaViolation(f"unknown response status {status!r}")

    @classmethod
    def from_bytes(cls, data: bytes) -> "CapabilityResponse":
        try:
            return cls.from_wire(json.loads(data.decode("utf-8")))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise SchemaViolation(f"unparseable response: {exc}") from exc

    @classmethod
    def ok(cls, **body) -> "CapabilityResponse":
        return cls("ok", body=body)

    @classmethod
    def fail(cls, message: str) -> "CapabilityResponse":
        return cls("error", error_message=message)


def decode_scoremap_body(body: dict) -> ScoreMap:
    try:
        raw = base64.b64decode(body["score_map_b64"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"missing or invalid score_map_b64: {exc}") from exc
    try:
        return maskio.decode_scoremap(raw)
    except Exception as exc:
        raise SchemaViolation(f"invalid AVSS payload: {exc}") from exc


def encode_scoremap_body(score_map: ScoreMap) -> dict:
    return {"score_map_b64": base64.b64encode(maskio.encode_scoremap(score_map)).decode("ascii")}


def _require_float_list(value, what: str):
    if not isinstance(value, list) or not value:
        raise SchemaViolation(f"{what} must be a non-empty list")
    for x in value:
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise SchemaViolation(f"{what} contains a non-numeric entry: {x!r}")


def validate_response(request: CapabilityRequest, response: CapabilityResponse) -> None:
    """Check an ok response body against the capability's schema; raises SchemaViolation."""
    if response.status != "ok":
        return
    body = response.body
    cap = request.capability
    if cap == "audio_classify":
        # An empty ranking is schema-valid; the strategy engine surfaces it
        # as a BackendError with stage context.
        ranking = body.get("ranking")
        if not isinstance(ranking, list):
            raise SchemaViolation("audio_classify ranking must be a list")
        for entry in ranking:
            if (not isinstance(entry, list) or len(entry) != 2
                    or not isinstance(entry[0], str) or not entry[0]
                    or not isinstance(entry[1], (int, float))):
                raise SchemaViolation(f"bad ranking entry: {entry!r}")
    elif cap in ("audio_caption", "image_caption"):
        if not isinstance(body.get("caption"), str):
            raise SchemaViolation(f"{cap} response must carry a caption string")
    elif cap in ("audio_classify_openvocab", "image_classify_openvocab"):
        candidates = request.payloads.get("candidates")
        n = len(candidates.value) if candidates is not None else None
        scores = body.get("scores")
        _require_float_list(scores, f"{cap} scores")
        if n is not None and len(scores) != n:
            raise SchemaViolation(f"{cap} returned {len(scores)} scores for {n} candidates")
    elif cap == "audio_embed":
        _require_float_list(body.get("embedding"), "audio_embed embedding")
    elif cap in ("ris_segment", "ris_segment_embedding"):
        decode_scoremap_body(body)
    elif cap == "text_encode_grad":
        _require_float_list(body.get("embedding"), "text_encode_grad embedding")
        grad = body.get("grad")
        if not isinstance(grad, list) or not grad:
            raise SchemaViolation("text_encode_grad grad must be a non-empty matrix")
        for row in grad:
            _require_float_list(row, "text_encode_grad grad row")
    elif cap == "nlp_chunk":
        phrases = body.get("phrases")
        if not isinstance(phrases, list) or any(not isinstance(p, str) for p in phrases):
            raise SchemaViolation("nlp_chunk phrases must be a list of strings")
