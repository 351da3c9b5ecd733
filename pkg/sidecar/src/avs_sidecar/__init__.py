"""Reference model-server sidecar speaking the backend capability wire protocol.

The sidecar depends on the engine only through the protocol (see the engine's
docs/protocol.md); it deliberately imports nothing from the engine package.
"""

__version__ = "0.1.0"

from .models import ModelRegistry, default_registry
from .app import create_app
from .conformance import ConformanceReport, run_conformance

__all__ = [
    "ModelRegistry",
    "default_registry",
    "create_app",
    "ConformanceReport",
    "run_conformance",
]
