import json

import numpy as np
import pytest

from avszero.errors import DuplicateId, MissingFile, ParseError
from avszero.manifest import load_manifest, validate_sample
from avszero.types import ImageRef, Sample

from conftest import write_manifest, write_png


def _write_lines(tmp_path, lines):
    path = tmp_path / "manifest.ndjson"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def _line(sid, image="i.png", audio="a.wav", gt="g.png", **extra):
    rec = {"sample_id": sid, "image": image, "audio": audio, "gt_mask": gt}
    rec.update(extra)
    return json.dumps(rec)


def test_valid_manifest_order_and_count(tmp_path):
    path = _write_lines(tmp_path, [_line("a"), _line("b"), _line("c")])
    samples = load_manifest(path)
    assert [s.sample_id for s in samples] == ["a", "b", "c"]


def test_duplicate_id(tmp_path):
    path = _write_lines(tmp_path, [_line("s1"), _line("s1")])
    with pytest.raises(DuplicateId):
        load_manifest(path)


def test_is3_style_pair_shares_image(tmp_path):
    path = _write_lines(tmp_path, [
        _line("pair_a", image="image.png", audio="audio_a.wav", gt="gt_a.png"),
        _line("pair_b", image="image.png", audio="audio_b.wav", gt="gt_b.png"),
    ])
    samples = load_manifest(path)
    assert len(samples) == 2
    assert samples[0].image.path == samples[1].image.path
    assert samples[0].audio.path != samples[1].audio.path
    assert samples[0].gt_mask != samples[1].gt_mask


def test_malformed_line_reports_line_number(tmp_path):
    path = _write_lines(tmp_path, [_line("ok"), "{not json"])
    with pytest.raises(ParseError, match=":2:"):
        load_manifest(path)


def test_missing_required_key(tmp_path):
    path = _write_lines(tmp_path, ['{"sample_id": "x", "image": "i.png"}'])
    with pytest.raises(ParseError, match="missing keys"):
        load_manifest(path)


def test_strict_mode_requires_assets(tmp_path):
    path = _write_lines(tmp_path, [_line("s1")])
    with pytest.raises(MissingFile):
        load_manifest(path, strict=True)
    load_manifest(path, strict=False)  # non-strict tolerates absent files


def test_paths_resolved_relative_to_manifest_dir(tmp_path, asset_dir):
    _, samples = asset_dir
    manifest_path = write_manifest(tmp_path, samples)
    loaded = load_manifest(manifest_path, strict=False)
    assert loaded[0].image.path.startswith(str(tmp_path))


def test_image_dimensions_probed(asset_dir):
    tmp_path, samples = asset_dir
    manifest_path = write_manifest(tmp_path, samples)
    loaded = load_manifest(manifest_path, strict=True)
    assert (loaded[0].image.width, loaded[0].image.height) == (8, 8)


def test_validate_well_formed(asset_dir):
    _, samples = asset_dir
    assert validate_sample(samples[0]) == []


def test_validate_empty_gt_warns(asset_dir):
    tmp_path, samples = asset_dir
    gt_path = str(tmp_path / "empty_gt.png")
    write_png(gt_path, np.zeros((8, 8)))
    sample = Sample(sample_id="e", image=samples[0].image, audio=samples[0].audio,
                    gt_mask=gt_path)
    warnings = validate_sample(sample)
    assert any("empty GT" in w for w in warnings)


def test_validate_dimension_mismatch_warns(asset_dir):
    tmp_path, samples = asset_dir
    gt_path = str(tmp_path / "small_gt.png")
    write_png(gt_path, np.full((4, 4), 255))
    sample = Sample(
        sample_id="m",
        image=ImageRef(path=samples[0].image.path, width=8, height=8),
        audio=samples[0].audio,
        gt_mask=gt_path,
    )
    warnings = validate_sample(sample)
    assert any("does not match" in w for w in warnings)
