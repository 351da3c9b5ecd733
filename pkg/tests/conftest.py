import base64
import json
import os

import numpy as np
import pytest
from PIL import Image

from avszero import maskio
from avszero.bridge import MockBackend, encode_scoremap_body
from avszero.types import AudioRef, ImageRef, Mask, Sample, ScoreMap


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(report, "nodeid", ""):
                continue
            if getattr(report, "when", "call") != "call" and outcome == "passed":
                continue
            criterion = dict(getattr(report, "user_properties", [])).get("criterion")
            if criterion:
                lines.append(f"{verdict}  {criterion}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(lines, key=lambda s: s[6:]):
            terminalreporter.write_line(line)


def write_png(path, array):
    Image.fromarray(np.asarray(array, dtype=np.uint8), mode="L").save(path)


def gt_scoremap(gt_bits):
    """Score map that reproduces the GT under both binarization routes."""
    return ScoreMap(np.asarray(gt_bits, dtype=np.float32))


def scoremap_body(score_map):
    return encode_scoremap_body(score_map)


@pytest.fixture
def asset_dir(tmp_path):
    """Five on-disk samples (8x8 image, audio bytes, GT mask) plus Sample objects."""
    samples = []
    rng = np.random.default_rng(42)
    for i in range(1, 6):
        sid = f"s{i}"
        img = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
        image_path = str(tmp_path / f"{sid}.png")
        write_png(image_path, img)
        audio_path = str(tmp_path / f"{sid}.wav")
        with open(audio_path, "wb") as fh:
            fh.write(b"RIFF" + bytes([i]) * 32)
        gt = np.zeros((8, 8), dtype=np.uint8)
        gt[i - 1: i + 2, 2:6] = 1
        gt_path = str(tmp_path / f"{sid}_gt.png")
        write_png(gt_path, gt * 255)
        samples.append(
            Sample(
                sample_id=sid,
                image=ImageRef(path=image_path, width=8, height=8),
                audio=AudioRef(path=audio_path, num_samples=36, sample_rate=16000),
                gt_mask=gt_path,
            )
        )
    return tmp_path, samples


LABELS = {"s1": "dog", "s2": "cat", "s3": "girl", "s4": "car", "s5": "electric shaver"}
CAPTIONS = {
    "s1": "a dog barks near a car",
    "s2": "a cat is meowing",
    "s3": "a girl is singing",
    "s4": "a car honks in the street",
    "s5": "an electric shaver is buzzing",
}
IMAGE_CAPTIONS = {
    "s1": "a dog and a cat on grass",
    "s2": "a cat on a sofa",
    "s3": "a girl with a microphone",
    "s4": "a car on a road",
    "s5": "a man with an electric shaver",
}


def build_mock(samples, ris_threshold=0.5):
    """Exhaustive mock backend covering all five strategies for the fixtures."""
    mock = MockBackend(name="fixture", version="1", ris_threshold=ris_threshold)
    for sample in samples:
        sid = sample.sample_id
        label = LABELS[sid]
        gt = maskio.decode_mask(sample.gt_mask)
        body = scoremap_body(gt_scoremap(gt.bits))
        mock.register("audio_classify", sid, {"ranking": [[label, 0.9], ["noise", 0.1]]})
        mock.register("audio_caption", sid, {"caption": CAPTIONS[sid]})
        mock.register("image_caption", sid, {"caption": IMAGE_CAPTIONS[sid]})
        mock.register("audio_embed", sid, {"embedding": [0.1 * (i + 1) for i in range(8)]})
        mock.register("ris_segment", sid, body)
        mock.register("ris_segment_embedding", sid, body)
        mock.register("audio_classify_openvocab", sid, _openvocab_scores(sid, "audio"))
        mock.register("image_classify_openvocab", sid, _openvocab_scores(sid, "image"))
    return mock


def _openvocab_scores(sid, modality):
    # Deterministic scores favoring the fixture label when present.
    from avszero.phrases import extract_noun_phrases

    caption = IMAGE_CAPTIONS[sid] if modality == "audio" else CAPTIONS[sid]
    phrases = [c.phrase for c in extract_noun_phrases(caption)]
    label = LABELS[sid]
    scores = [0.9 if p == label else 0.1 / (i + 1) for i, p in enumerate(phrases)]
    return {"scores": scores}


def write_manifest(tmp_path, samples):
    manifest_path = tmp_path / "manifest.ndjson"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps({
                "sample_id": sample.sample_id,
                "image": os.path.basename(sample.image.path),
                "audio": os.path.basename(sample.audio.path),
                "gt_mask": os.path.basename(sample.gt_mask),
            }) + "\n")
    return str(manifest_path)


def write_mock_roster(tmp_path, samples, ris_threshold=0.5):
    """Roster + fixture-table files so the CLI can run fully mocked."""
    mock = build_mock(samples, ris_threshold)
    tables = {}
    for capability, table in mock._tables.items():
        tables[capability] = {fp: resp.body for fp, resp in table.items()}
    fixtures_path = tmp_path / "fixtures.json"
    with open(fixtures_path, "w", encoding="utf-8") as fh:
        json.dump(tables, fh)
    roster_path = tmp_path / "backends.toml"
    with open(roster_path, "w", encoding="utf-8") as fh:
        fh.write(
            '[[backend]]\nname = "fixture"\nversion = "1"\ntransport = "mock"\n'
            f'fixtures = "fixtures.json"\nris_threshold = {ris_threshold}\n'
        )
    return str(roster_path)
