"""Model registry and the deterministic reference models.

The reference models are stand-ins with the right contracts: deterministic in
their inputs, schema-exact outputs, and no network or weight downloads. Real
pretrained wrappers slot in by registering a different handler for a
capability; the registry metadata (identifier, revision, device) is what
/v1/meta and the roster report, so substitutions stay visible.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np
from PIL import Image

from .wire import Part, WireError, scoremap_body

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

Handler = Callable[[str, Dict[str, Part]], dict]

AUDIO_VOCAB = (
    "dog", "cat", "girl", "car", "electric shaver", "bee", "piano",
    "guitar", "helicopter", "ambulance", "rooster", "train",
)

EMBED_DIM = 8


@dataclass(frozen=True)
class ModelEntry:
    identifier: str
    revision: str
    device: str = "cpu"


@dataclass
class ModelRegistry:
    name: str = "avs-sidecar"
    version: str = "0.1.0"
    ris_threshold: float = 0.5
    entries: Dict[str, ModelEntry] = field(default_factory=dict)
    handlers: Dict[str, Handler] = field(default_factory=dict)

    def register(self, capability: str, entry: ModelEntry, handler: Handler) -> None:
        self.entries[capability] = entry
        self.handlers[capability] = handler

    @property
    def capabilities(self):
        return sorted(self.entries)

    def meta(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "capabilities": self.capabilities,
            "ris_threshold": self.ris_threshold,
            "models": {
                cap: {"identifier": e.identifier, "revision": e.revision, "device": e.device}
                for cap, e in sorted(self.entries.items())
            },
        }

    def handle(self, capability: str, sample_id: str, payloads: Dict[str, Part]) -> dict:
        handler = self.handlers.get(capability)
        if handler is None:
            raise WireError(f"capability {capability!r} not served")
        return handler(sample_id, payloads)


def _rng_for(*chunks: bytes) -> np.random.Generator:
    digest = hashlib.sha256(b"\x00".join(chunks)).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _decode_image(payloads: Dict[str, Part]) -> tuple[bytes, int, int]:
    raw = payloads["image"].value
    try:
        with Image.open(io.BytesIO(raw)) as im:
            return raw, im.width, im.height
    except Exception as exc:
        raise WireError(f"cannot decode image payload: {exc}") from exc


def _ref_audio_classify(sample_id, payloads):
    rng = _rng_for(b"audio_classify", payloads["audio"].value)
    scores = np.sort(rng.uniform(0, 1, size=len(AUDIO_VOCAB)))[::-1]
    order = rng.permutation(len(AUDIO_VOCAB))
    return {"ranking": [[AUDIO_VOCAB[i], float(s)] for i, s in zip(order, scores)]}


def _ref_audio_caption(sample_id, payloads):
    rng = _rng_for(b"audio_caption", payloads["audio"].value)
    subject = AUDIO_VOCAB[int(rng.integers(len(AUDIO_VOCAB)))]
    return {"caption": f"a {subject} is making a sound"}


def _ref_image_caption(sample_id, payloads):
    raw, _, _ = _decode_image(payloads)
    rng = _rng_for(b"image_caption", raw)
    subject = AUDIO_VOCAB[int(rng.integers(len(AUDIO_VOCAB)))]
    scene = ("on grass", "in a room", "on a street", "near a window")
    return {"caption": f"a {subject} {scene[int(rng.integers(len(scene)))]}"}


def _openvocab(tag: bytes):
    def handler(sample_id, payloads):
        media_name = "audio" if tag.startswith(b"audio") else "image"
        media = payloads[media_name].value
        # Each candidate is scored independently of its position, so the
        # ordering contract (scores follow candidate order) holds trivially.
        scores = [
            float(_rng_for(tag, media, c.encode("utf-8")).uniform(0, 1))
            for c in payloads["candidates"].value
        ]
        return {"scores": scores}
    return handler


def _ref_audio_embed(sample_id, payloads):
    rng = _rng_for(b"audio_embed", payloads["audio"].value)
    vec = rng.standard_normal(EMBED_DIM)
    vec /= np.linalg.norm(vec)
    return {"embedding": [float(x) for x in vec]}


def _scoremap(seed_chunks, width, height):
    rng = _rng_for(*seed_chunks)
    # Smooth blob centered at a hash-derived point; scores in [0, 1].
    cx, cy = rng.uniform(0, width), rng.uniform(0, height)
    xs, ys = np.meshgrid(np.arange(width), np.arange(height))
    radius = max(width, height) / 2.0
    dist2 = ((xs - cx) ** 2 + (ys - cy) ** 2) / (radius ** 2)
    return np.exp(-dist2).astype(np.float32)


def _ref_ris_segment(sample_id, payloads):
    raw, width, height = _decode_image(payloads)
    text = payloads["text"].value.encode("utf-8")
    return scoremap_body(_scoremap((b"ris_segment", raw, text), width, height))


def _ref_ris_segment_embedding(sample_id, payloads):
    raw, width, height = _decode_image(payloads)
    rows = payloads["embeddings"].value
    blob = b"".join(np.asarray(row, dtype="<f8").tobytes() for row in rows)
    return scoremap_body(_scoremap((b"ris_segment_embedding", raw, blob), width, height))


_REFERENCE_HANDLERS: Dict[str, Handler] = {
    "audio_classify": _ref_audio_classify,
    "audio_caption": _ref_audio_caption,
    "image_caption": _ref_image_caption,
    "audio_classify_openvocab": _openvocab(b"audio_classify_openvocab"),
    "image_classify_openvocab": _openvocab(b"image_classify_openvocab"),
    "audio_embed": _ref_audio_embed,
    "ris_segment": _ref_ris_segment,
    "ris_segment_embedding": _ref_ris_segment_embedding,
}


def default_registry() -> ModelRegistry:
    registry = ModelRegistry()
    for capability, handler in _REFERENCE_HANDLERS.items():
        entry = ModelEntry(identifier=f"reference/{capability}", revision="r1")
        registry.register(capability, entry, handler)
    return registry


def registry_from_config(path: str) -> ModelRegistry:
    """Build a registry from a TOML file; unlisted capabilities are not served.

    ```toml
    name = "avs-sidecar"
    ris_threshold = 0.35
    [models.ris_segment]
    identifier = "reference/ris_segment"
    revision = "r1"
    ```
    Only reference handlers are bundled; an unknown identifier is an error so
    a missing real-model wrapper fails at startup, not per-request.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    registry = ModelRegistry(
        name=str(doc.get("name", "avs-sidecar")),
        version=str(doc.get("version", "0.1.0")),
        ris_threshold=float(doc.get("ris_threshold", 0.5)),
    )
    for capability, spec in doc.get("models", {}).items():
        handler = _REFERENCE_HANDLERS.get(capability)
        identifier = str(spec.get("identifier", f"reference/{capability}"))
        if handler is None or not identifier.startswith("reference/"):
            raise WireError(f"no loadable model for {capability!r} ({identifier})")
        registry.register(
            capability,
            ModelEntry(identifier=identifier, revision=str(spec.get("revision", "r1")),
                       device=str(spec.get("device", "cpu"))),
            handler,
        )
    if not registry.entries:
        raise WireError(f"config {path} declares no models")
    return registry
