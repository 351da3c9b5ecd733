import os

from fastapi.testclient import TestClient

from avs_sidecar import create_app, run_conformance
from avs_sidecar.cli import main
from avs_sidecar.models import ModelEntry, ModelRegistry, _REFERENCE_HANDLERS

from conftest import GOLDEN_DIR


def test_all_goldens_pass(client):
    report = run_conformance(client, GOLDEN_DIR)
    assert report.passed, report.render()
    names = [name for name, _, _ in report.checks]
    assert "meta" in names
    assert any(name.startswith("ris_segment") for name in names)
    assert "audio_classify_openvocab ordering" in names


def test_missing_threshold_fails_with_named_field(client, monkeypatch):
    app = create_app()
    broken = TestClient(app)
    real_get = broken.get

    def patched_get(path, **kw):
        resp = real_get(path, **kw)
        if path == "/v1/meta":
            class Fake:
                status_code = 200

                @staticmethod
                def json():
                    doc = resp.json()
                    doc.pop("ris_threshold")
                    return doc
            return Fake()
        return resp

    broken.get = patched_get
    report = run_conformance(broken, GOLDEN_DIR)
    assert not report.passed
    assert any("ris_threshold" in detail for name, ok, detail in report.checks
               if name == "meta" and not ok)


def test_unserved_capability_reported_not_raised():
    registry = ModelRegistry()
    registry.register("audio_caption", ModelEntry("reference/audio_caption", "r1"),
                      _REFERENCE_HANDLERS["audio_caption"])
    report = run_conformance(TestClient(create_app(registry)), GOLDEN_DIR)
    assert not report.passed
    failures = [name for name, ok, _ in report.checks if not ok]
    assert "audio_classify.json" in failures
    assert ("audio_caption.json", True, "") in report.checks


def test_empty_golden_dir_fails(tmp_path, client):
    report = run_conformance(client, str(tmp_path))
    assert not report.passed


def test_cli_conformance_exit_codes(tmp_path, capsys):
    assert main(["conformance", "--golden-dir", os.path.abspath(GOLDEN_DIR)]) == 0
    out = capsys.readouterr().out
    assert "conformance: PASS" in out
    assert main(["conformance", "--golden-dir", str(tmp_path)]) == 1
