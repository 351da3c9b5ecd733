import base64
import hashlib
import io
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from avs_sidecar import create_app

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "golden")


@pytest.fixture
def client():
    return TestClient(create_app())


def png_bytes(width=9, height=6, seed=123):
    rng = np.random.default_rng(seed)
    img = Image.fromarray(rng.integers(0, 256, size=(height, width), dtype=np.uint8),
                          mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def binary_wire(data):
    return {"kind": "binary", "b64": base64.b64encode(data).decode("ascii"),
            "sha256": hashlib.sha256(data).hexdigest()}


def envelope(capability, sample_id="t1", **payloads):
    return {"capability": capability, "sample_id": sample_id, "payloads": payloads}
