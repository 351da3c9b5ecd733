"""Strategy engine: composes backend capabilities into the five bridging
strategies (classification, captioning, inversion, and the two cross-modal
verification variants), each ending in exactly one RIS call per sample.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import inversion as inv
from .bridge import (
    BackendSet,
    CapabilityRequest,
    ResponseCache,
    binary_part,
    call,
    decode_scoremap_body,
    matrix_part,
    strings_part,
    text_part,
)
from .errors import BackendError, EmptyCaption, EmptyLabel
from .phrases import Candidate, ChunkerLexicon, extract_noun_phrases, normalize_phrase
from .types import PredictionRecord, Sample, ScoreMap

DEFAULT_TEMPLATE = "a photo of {c}."


@dataclass(frozen=True)
class PromptTemplate:
    template: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        if self.template.count("{c}") != 1:
            raise ValueError("template must contain exactly one {c} placeholder")


def build_prompt(label: str, template: PromptTemplate = PromptTemplate()) -> str:
    """Substitute the normalized label into the prompt; prompts end with a period."""
    normalized = normalize_phrase(label)
    if not normalized:
        raise EmptyLabel(f"label {label!r} is empty after normalization")
    prompt = template.template.replace("{c}", normalized)
    prompt = _collapse(prompt)
    if not prompt.endswith("."):
        prompt += "."
    return prompt


def _collapse(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


class StrategyContext:
    """Shared plumbing for strategy runs: backends, optional cache, templates."""

    def __init__(
        self,
        backends: BackendSet,
        cache: Optional[ResponseCache] = None,
        template: PromptTemplate = PromptTemplate(),
        lexicon: Optional[ChunkerLexicon] = None,
        inversion_config: inv.InversionConfig = inv.InversionConfig(),
        encoder_factory=None,
    ):
        self.backends = backends
        self.cache = cache
        self.template = template
        self.lexicon = lexicon
        self.inversion_config = inversion_config
        # encoder_factory(output_dim) -> DifferentiableEncoder; defaults to the toy encoder
        self.encoder_factory = encoder_factory or (
            lambda dim: inv.ToyEncoder(token_dim=16, output_dim=dim, seed=7)
        )

    def dispatch(self, request: CapabilityRequest):
        backend = self.backends.for_capability(request.capability)
        if self.cache is not None:
            response, _ = self.cache.lookup_or_call(backend, request)
        else:
            response = call(backend, request)
        if response.status != "ok":
            raise BackendError(request.capability, response.error_message or "backend error")
        return backend, response


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise BackendError("io", f"cannot read {path}: {exc}") from exc


def _ris(ctx: StrategyContext, sample: Sample, referring_text: str) -> Tuple[ScoreMap, float]:
    request = CapabilityRequest(
        capability="ris_segment",
        sample_id=sample.sample_id,
        payloads={"image": binary_part(_read(sample.image.path)),
                  "text": text_part(referring_text)},
    )
    backend, response = ctx.dispatch(request)
    return decode_scoremap_body(response.body), backend.ris_threshold


def run_classification(sample: Sample, ctx: StrategyContext) -> PredictionRecord:
    timings = {}
    t0 = time.perf_counter()
    request = CapabilityRequest(
        capability="audio_classify",
        sample_id=sample.sample_id,
        payloads={"audio": binary_part(_read(sample.audio.path))},
    )
    _, response = ctx.dispatch(request)
    ranking = response.body["ranking"]
    if not ranking:
        raise BackendError("audio_classify", "empty ranking")
    label = max(ranking, key=lambda e: e[1])[0]
    timings["audio_classify"] = (time.perf_counter() - t0) * 1000

    prompt = build_prompt(label, ctx.template)
    t0 = time.perf_counter()
    score_map, threshold = _ris(ctx, sample, prompt)
    timings["ris_segment"] = (time.perf_counter() - t0) * 1000
    return PredictionRecord(
        sample_id=sample.sample_id,
        strategy="classification",
        derived_text=prompt,
        score_map=score_map,
        ris_threshold=threshold,
        trace={"label": label},
        timings_ms=timings,
    )


def run_captioning(sample: Sample, ctx: StrategyContext) -> PredictionRecord:
    timings = {}
    t0 = time.perf_counter()
    request = CapabilityRequest(
        capability="audio_caption",
        sample_id=sample.sample_id,
        payloads={"audio": binary_part(_read(sample.audio.path))},
    )
    _, response = ctx.dispatch(request)
    caption = _collapse(response.body["caption"])
    if not caption:
        raise EmptyCaption(f"{sample.sample_id}: audio caption is empty")
    timings["audio_caption"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    score_map, threshold = _ris(ctx, sample, caption)
    timings["ris_segment"] = (time.perf_counter() - t0) * 1000
    return PredictionRecord(
        sample_id=sample.sample_id,
        strategy="captioning",
        derived_text=caption,
        score_map=score_map,
        ris_threshold=threshold,
        trace={"caption": caption},
        timings_ms=timings,
    )


def run_inversion(sample: Sample, ctx: StrategyContext) -> PredictionRecord:
    timings = {}
    # Preflight the embedding-accepting RIS endpoint before any optimization.
    ctx.backends.for_capability("ris_segment_embedding")

    t0 = time.perf_counter()
    request = CapabilityRequest(
        capability="audio_embed",
        sample_id=sample.sample_id,
        payloads={"audio": binary_part(_read(sample.audio.path))},
    )
    _, response = ctx.dispatch(request)
    target = np.asarray(response.body["embedding"], dtype=np.float64)
    timings["audio_embed"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    encoder = ctx.encoder_factory(target.shape[0])
    tokens, final_similarity, iters = inv.invert(target, encoder, ctx.inversion_config)
    timings["invert"] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    ris_request = CapabilityRequest(
        capability="ris_segment_embedding",
        sample_id=sample.sample_id,
        payloads={"image": binary_part(_read(sample.image.path)),
                  "embeddings": matrix_part(tokens)},
    )
    backend, ris_response = ctx.dispatch(ris_request)
    timings["ris_segment_embedding"] = (time.perf_counter() - t0) * 1000
    return PredictionRecord(
        sample_id=sample.sample_id,
        strategy="inversion",
        embedding=tokens,
        score_map=decode_scoremap_body(ris_response.body),
        ris_threshold=backend.ris_threshold,
        trace={"final_similarity": final_similarity, "iters": iters},
        timings_ms=timings,
    )


def _caption(ctx: StrategyContext, sample: Sample, capability: str) -> str:
    payload_name = "audio" if capability == "audio_caption" else "image"
    path = sample.audio.path if capability == "audio_caption" else sample.image.path
    request = CapabilityRequest(
        capability=capability,
        sample_id=sample.sample_id,
        payloads={payload_name: binary_part(_read(path))},
    )
    _, response = ctx.dispatch(request)
    return _collapse(response.body["caption"])


def _score_candidates(ctx: StrategyContext, sample: Sample, capability: str,
                      candidates: List[Candidate]) -> List[float]:
    payload_name = "audio" if capability.startswith("audio") else "image"
    path = sample.audio.path if payload_name == "audio" else sample.image.path
    request = CapabilityRequest(
        capability=capability,
        sample_id=sample.sample_id,
        payloads={
            payload_name: binary_part(_read(path)),
            "candidates": strings_part([c.phrase for c in candidates]),
        },
    )
    _, response = ctx.dispatch(request)
    return [float(s) for s in response.body["scores"]]


def _argmax_first(scores: List[float]) -> int:
    # Ties break toward the earlier caption-order candidate.
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def _verified(sample: Sample, ctx: StrategyContext, strategy: str,
              caption_capability: str, scoring_capability: str,
              fallback) -> PredictionRecord:
    timings = {}
    t0 = time.perf_counter()
    caption = _caption(ctx, sample, caption_capability)
    timings[caption_capability] = (time.perf_counter() - t0) * 1000
    if not caption and strategy == "acap_vcls":
        # Empty audio caption: the captioning fallback re-raises EmptyCaption.
        return fallback(sample, ctx)

    candidates = extract_noun_phrases(caption, ctx.lexicon)
    if not candidates:
        record = fallback(sample, ctx)
        record.strategy = strategy
        record.trace = {
            "caption": caption,
            "candidates": [],
            "candidate_scores": [],
            "winner": record.trace.get("label") or record.trace.get("caption", ""),
            "fallback_used": True,
        }
        return record

    t0 = time.perf_counter()
    scores = _score_candidates(ctx, sample, scoring_capability, candidates)
    timings[scoring_capability] = (time.perf_counter() - t0) * 1000
    winner = candidates[_argmax_first(scores)].phrase

    prompt = build_prompt(winner, ctx.template)
    t0 = time.perf_counter()
    score_map, threshold = _ris(ctx, sample, prompt)
    timings["ris_segment"] = (time.perf_counter() - t0) * 1000
    return PredictionRecord(
        sample_id=sample.sample_id,
        strategy=strategy,
        derived_text=prompt,
        score_map=score_map,
        ris_threshold=threshold,
        trace={
            "caption": caption,
            "candidates": [c.phrase for c in candidates],
            "candidate_scores": [[c.phrase, s] for c, s in zip(candidates, scores)],
            "winner": winner,
            "fallback_used": False,
        },
        timings_ms=timings,
    )


def run_vcap_acls(sample: Sample, ctx: StrategyContext) -> PredictionRecord:
    """Image caption supplies candidates; open-vocabulary audio scoring picks the winner."""
    return _verified(sample, ctx, "vcap_acls", "image_caption",
                     "audio_classify_openvocab", run_classification)


def run_acap_vcls(sample: Sample, ctx: StrategyContext) -> PredictionRecord:
    """Audio caption supplies candidates; open-vocabulary image scoring picks the winner."""
    return _verified(sample, ctx, "acap_vcls", "audio_caption",
                     "image_classify_openvocab", run_captioning)


STRATEGY_RUNNERS = {
    "classification": run_classification,
    "captioning": run_captioning,
    "inversion": run_inversion,
    "vcap_acls": run_vcap_acls,
    "acap_vcls": run_acap_vcls,
}

REQUIRED_CAPABILITIES = {
    "classification": ("audio_classify", "ris_segment"),
    "captioning": ("audio_caption", "ris_segment"),
    "inversion": ("audio_embed", "ris_segment_embedding"),
    "vcap_acls": ("image_caption", "audio_classify_openvocab", "ris_segment",
                  "audio_classify"),
    "acap_vcls": ("audio_caption", "image_classify_openvocab", "ris_segment"),
}


def run_strategy(strategy: str, sample: Sample, ctx: StrategyContext) -> PredictionRecord:
    runner = STRATEGY_RUNNERS.get(strategy)
    if runner is None:
        raise ValueError(f"unknown strategy {strategy!r}")
    return runner(sample, ctx)
