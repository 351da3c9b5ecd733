"""The shared golden request fixtures must stay parseable by the engine.

The same files drive the sidecar's conformance runner; this keeps both sides
honest about the wire format without sharing code.
"""

import json
import os

import pytest

from avszero.bridge import CapabilityRequest
from avszero.bridge.protocol import CAPABILITIES

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "..", "golden")

GOLDEN_FILES = sorted(f for f in os.listdir(GOLDEN_DIR) if f.endswith(".json"))


def test_goldens_cover_every_required_capability():
    covered = {name[:-len(".json")] for name in GOLDEN_FILES}
    required = [c for c in CAPABILITIES if c not in ("text_encode_grad", "nlp_chunk")]
    assert covered == set(required)


@pytest.mark.parametrize("name", GOLDEN_FILES)
def test_golden_parses_and_fingerprints(name):
    with open(os.path.join(GOLDEN_DIR, name), "r", encoding="utf-8") as fh:
        envelope = json.load(fh)
    request = CapabilityRequest.from_wire(envelope)
    assert request.capability == name[:-len(".json")]
    assert request.fingerprint_parts()  # hashable payloads present
    # wire round trip is canonical: re-encoding parses identically
    again = CapabilityRequest.from_wire(json.loads(json.dumps(request.to_wire())))
    assert again.fingerprint_parts() == request.fingerprint_parts()
