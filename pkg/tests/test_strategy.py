import numpy as np
import pytest

from avszero.bridge import BackendSet, MockBackend, binary_part, text_part
from avszero.errors import BackendError, EmptyCaption, EmptyLabel, UnsupportedCapability
from avszero.strategy import (
    PromptTemplate,
    StrategyContext,
    build_prompt,
    run_acap_vcls,
    run_captioning,
    run_classification,
    run_inversion,
    run_strategy,
    run_vcap_acls,
)
from avszero.types import ScoreMap

from conftest import build_mock, scoremap_body


class TestBuildPrompt:
    def test_default_template(self):
        assert build_prompt("dog") == "a photo of dog."

    def test_label_normalized(self):
        assert build_prompt("Electric Shaver") == "a photo of electric shaver."

    def test_empty_label(self):
        with pytest.raises(EmptyLabel):
            build_prompt("")
        with pytest.raises(EmptyLabel):
            build_prompt("The")  # determiner-only collapses to empty

    def test_custom_template(self):
        assert build_prompt("dog", PromptTemplate("{c} making a sound")) == "dog making a sound."

    def test_template_placeholder_checked(self):
        with pytest.raises(ValueError):
            PromptTemplate("no placeholder")
        with pytest.raises(ValueError):
            PromptTemplate("{c} and {c}")


@pytest.fixture
def mocked(asset_dir):
    tmp_path, samples = asset_dir
    mock = build_mock(samples)
    ctx = StrategyContext(BackendSet([mock]))
    return samples, mock, ctx


class TestClassification:
    def test_argmax_label_to_prompt(self, mocked):
        samples, mock, ctx = mocked
        record = run_classification(samples[0], ctx)
        assert record.derived_text == "a photo of dog."
        assert record.trace["label"] == "dog"
        assert record.score_map is not None

    def test_empty_ranking_is_backend_error(self, mocked):
        samples, mock, ctx = mocked
        mock.register("audio_classify", samples[0].sample_id, {"ranking": []})
        with pytest.raises(BackendError, match="audio_classify"):
            run_classification(samples[0], ctx)

    def test_ris_receives_prompt_fixture(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        fixed = ScoreMap(np.full((3, 3), 0.25, dtype=np.float32))
        mock.register("ris_segment", "s1|a photo of dog.", scoremap_body(fixed))
        ctx = StrategyContext(BackendSet([mock]))
        record = run_classification(samples[0], ctx)
        assert record.score_map == fixed


class TestCaptioning:
    def test_caption_used_verbatim(self, mocked):
        samples, mock, ctx = mocked
        record = run_captioning(samples[2], ctx)
        assert record.derived_text == "a girl is singing"

    def test_whitespace_caption_rejected(self, mocked):
        samples, mock, ctx = mocked
        mock.register("audio_caption", samples[0].sample_id, {"caption": "   \n"})
        with pytest.raises(EmptyCaption):
            run_captioning(samples[0], ctx)

    def test_trailing_newline_trimmed(self, mocked):
        samples, mock, ctx = mocked
        mock.register("audio_caption", samples[0].sample_id, {"caption": "a dog barks\n"})
        record = run_captioning(samples[0], ctx)
        assert record.derived_text == "a dog barks"


class TestInversion:
    def test_records_similarity_and_iters(self, mocked):
        samples, mock, ctx = mocked
        record = run_inversion(samples[0], ctx)
        assert record.strategy == "inversion"
        assert record.embedding is not None
        assert 0 <= record.trace["final_similarity"] <= 1
        assert record.trace["iters"] >= 1

    def test_missing_embedding_ris_capability(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        del mock._tables["ris_segment_embedding"]
        ctx = StrategyContext(BackendSet([mock]))
        with pytest.raises(UnsupportedCapability):
            run_inversion(samples[0], ctx)

    def test_recoverable_audio_embedding(self, asset_dir):
        from avszero.inversion import ToyEncoder

        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        encoder = ToyEncoder(token_dim=16, output_dim=8, seed=7)
        target = encoder.encode(np.random.default_rng(1).standard_normal((4, 16)))
        mock.register("audio_embed", samples[0].sample_id,
                      {"embedding": [float(x) for x in target]})
        ctx = StrategyContext(BackendSet([mock]))
        record = run_inversion(samples[0], ctx)
        assert record.trace["final_similarity"] >= 0.999


class TestVcapAcls:
    def test_winner_from_caption_candidates(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        mock.register("image_caption", "s1", {"caption": "a dog and a cat on grass"})
        mock.register("audio_classify_openvocab", "s1", {"scores": [0.8, 0.1, 0.05]})
        ctx = StrategyContext(BackendSet([mock]))
        record = run_vcap_acls(samples[0], ctx)
        assert record.trace["winner"] == "dog"
        assert record.derived_text == "a photo of dog."
        assert record.trace["fallback_used"] is False

    def test_fallback_on_no_candidates(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        mock.register("image_caption", "s1", {"caption": "running quickly"})
        ctx = StrategyContext(BackendSet([mock]))
        record = run_vcap_acls(samples[0], ctx)
        assert record.strategy == "vcap_acls"
        assert record.trace["fallback_used"] is True
        assert record.derived_text == "a photo of dog."  # classification path

    def test_rejection_property(self, mocked):
        samples, mock, ctx = mocked
        for sample in samples:
            record = run_vcap_acls(sample, ctx)
            if not record.trace["fallback_used"]:
                assert record.trace["winner"] in record.trace["candidates"]

    def test_bee_rejected_when_not_visible(self, asset_dir):
        # Closed-set audio classification would say "bee"; the caption has no bee.
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        sid = "s5"
        mock.register("audio_classify", sid, {"ranking": [["bee", 0.95], ["electric shaver", 0.9]]})
        mock.register("image_caption", sid, {"caption": "a man with an electric shaver"})
        mock.register("audio_classify_openvocab", sid, {"scores": [0.2, 0.7]})
        ctx = StrategyContext(BackendSet([mock]))
        record = run_vcap_acls(samples[4], ctx)
        assert record.trace["winner"] == "electric shaver"
        assert "bee" not in record.trace["candidates"]

    def test_argmax_invariant_under_positive_scaling(self, asset_dir):
        tmp_path, samples = asset_dir
        for scale in (1.0, 0.001, 1000.0):
            mock = build_mock(samples)
            mock.register("audio_classify_openvocab", "s1",
                          {"scores": [scale * s for s in (0.8, 0.1, 0.05)]})
            ctx = StrategyContext(BackendSet([mock]))
            assert run_vcap_acls(samples[0], ctx).trace["winner"] == "dog"


class TestAcapVcls:
    def test_mirrored_roles(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        mock.register("audio_caption", "s1", {"caption": "a dog barks near a car"})
        mock.register("image_classify_openvocab", "s1", {"scores": [0.7, 0.6]})
        ctx = StrategyContext(BackendSet([mock]))
        record = run_acap_vcls(samples[0], ctx)
        assert record.trace["winner"] == "dog"

    def test_empty_audio_caption_double_failure(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        mock.register("audio_caption", "s1", {"caption": ""})
        ctx = StrategyContext(BackendSet([mock]))
        with pytest.raises(EmptyCaption):
            run_acap_vcls(samples[0], ctx)

    def test_single_candidate_wins_regardless_of_score(self, asset_dir):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        mock.register("audio_caption", "s2", {"caption": "a cat is meowing"})
        mock.register("image_classify_openvocab", "s2", {"scores": [0.0001]})
        ctx = StrategyContext(BackendSet([mock]))
        record = run_acap_vcls(samples[1], ctx)
        assert record.trace["winner"] == "cat"


class TestInvariants:
    @pytest.mark.parametrize("strategy", [
        "classification", "captioning", "inversion", "vcap_acls", "acap_vcls"])
    def test_ris_called_exactly_once_per_sample(self, asset_dir, strategy):
        tmp_path, samples = asset_dir
        mock = build_mock(samples)
        ctx = StrategyContext(BackendSet([mock]))
        for sample in samples:
            run_strategy(strategy, sample, ctx)
        ris_calls = (mock.call_counts.get("ris_segment", 0)
                     + mock.call_counts.get("ris_segment_embedding", 0))
        assert ris_calls == len(samples)

    @pytest.mark.parametrize("strategy", [
        "classification", "captioning", "inversion", "vcap_acls", "acap_vcls"])
    def test_deterministic_records(self, asset_dir, strategy):
        tmp_path, samples = asset_dir

        def snapshot():
            mock = build_mock(samples)
            ctx = StrategyContext(BackendSet([mock]))
            out = []
            for sample in samples:
                record = run_strategy(strategy, sample, ctx)
                out.append((record.sample_id, record.derived_text,
                            None if record.embedding is None else record.embedding.tobytes(),
                            record.score_map.scores.tobytes(), record.trace))
            return out

        assert snapshot() == snapshot()
