"""Backend handles: mock, HTTP and subprocess transports, plus roster loading.

A backend declares its capability subset and metadata (name, version,
ris_threshold). ``call`` enforces capability declarations, timeouts and
response schemas before anything reaches the strategy engine.
"""

from __future__ import annotations

import json
import logging
import subprocess
import threading
try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib
from typing import Dict, List, Optional

from ..errors import (
    BackendError,
    ConfigError,
    SchemaViolation,
    Timeout,
    TransportError,
    UnmatchedFixture,
    UnsupportedCapability,
)
from .protocol import CAPABILITIES, CapabilityRequest, CapabilityResponse, validate_response

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 120.0


class BackendHandle:
    name: str = "backend"
    version: str = "0"
    capabilities: tuple = ()
    ris_threshold: float = 0.5

    def invoke(self, request: CapabilityRequest, timeout: float) -> CapabilityResponse:
        raise NotImplementedError


def call(backend: BackendHandle, request: CapabilityRequest,
         timeout: float = DEFAULT_TIMEOUT_S) -> CapabilityResponse:
    """Dispatch a request, mapping transport failures and validating the schema."""
    if request.capability not in backend.capabilities:
        raise UnsupportedCapability(
            f"backend {backend.name!r} does not provide {request.capability}"
        )
    try:
        response = backend.invoke(request, timeout)
    except (Timeout, TransportError, UnmatchedFixture):
        raise
    except Exception as exc:
        raise TransportError(f"{request.capability}: {exc}") from exc
    validate_response(request, response)
    return response


class MockBackend(BackendHandle):
    """Deterministic in-process backend resolving requests from canned tables.

    Fingerprints are matched in order: "<sample_id>|<text>", "<sample_id>",
    "<text>", "*". Unmatched requests raise UnmatchedFixture so test fixture
    tables must be exhaustive.
    """

    def __init__(self, name: str = "mock", version: str = "1", ris_threshold: float = 0.5):
        self.name = name
        self.version = version
        self.ris_threshold = ris_threshold
        self._tables: Dict[str, Dict[str, CapabilityResponse]] = {}
        self.call_counts: Dict[str, int] = {}

    @property
    def capabilities(self):
        return tuple(self._tables.keys())

    def register(self, capability: str, fingerprint: str, response) -> None:
        if capability not in CAPABILITIES:
            raise SchemaViolation(f"unknown capability {capability!r}")
        if isinstance(response, dict):
            response = CapabilityResponse.ok(**response)
        table = self._tables.setdefault(capability, {})
        if fingerprint in table:
            log.warning("mock fixture %s/%s overridden; last registration wins",
                        capability, fingerprint)
        table[fingerprint] = response

    def invoke(self, request: CapabilityRequest, timeout: float) -> CapabilityResponse:
        table = self._tables.get(request.capability, {})
        self.call_counts[request.capability] = self.call_counts.get(request.capability, 0) + 1
        text = request.text()
        candidates = [request.sample_id]
        if text is not None:
            candidates.insert(0, f"{request.sample_id}|{text}")
            candidates.append(text)
        candidates.append("*")
        for fp in candidates:
            if fp in table:
                return table[fp]
        raise UnmatchedFixture(
            f"no fixture for {request.capability} matching {candidates!r}"
        )


def register_mock(backend: MockBackend, capability: str, table: Dict[str, object]) -> None:
    """Register a fingerprint -> canned-response table on a mock backend."""
    for fingerprint, response in table.items():
        backend.register(capability, fingerprint, response)


class HttpBackend(BackendHandle):
    """Backend reached over HTTP POST /v1/<capability>."""

    def __init__(self, url: str, name: str, version: str = "0",
                 capabilities: tuple = (), ris_threshold: float = 0.5):
        self.url = url.rstrip("/")
        self.name = name
        self.version = version
        self.capabilities = tuple(capabilities)
        self.ris_threshold = ris_threshold

    @classmethod
    def from_meta(cls, url: str, timeout: float = DEFAULT_TIMEOUT_S) -> "HttpBackend":
        import requests

        try:
            meta = requests.get(url.rstrip("/") + "/v1/meta", timeout=timeout).json()
        except Exception as exc:
            raise TransportError(f"cannot fetch {url}/v1/meta: {exc}") from exc
        return cls(
            url=url,
            name=meta.get("name", "remote"),
            version=str(meta.get("version", "0")),
            capabilities=tuple(meta.get("capabilities", ())),
            ris_threshold=float(meta.get("ris_threshold", 0.5)),
        )

    def invoke(self, request: CapabilityRequest, timeout: float) -> CapabilityResponse:
        import requests

        try:
            resp = requests.post(
                f"{self.url}/v1/{request.capability}",
                json=request.to_wire(),
                timeout=timeout,
            )
        except requests.Timeout as exc:
            raise Timeout(f"{request.capability}: timed out after {timeout}s") from exc
        except requests.RequestException as exc:
            raise TransportError(f"{request.capability}: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"{request.capability}: HTTP {resp.status_code}")
        return CapabilityResponse.from_bytes(resp.content)


class SubprocessBackend(BackendHandle):
    """Backend spoken to over newline-delimited JSON on stdin/stdout."""

    def __init__(self, argv: List[str], name: str, version: str = "0",
                 capabilities: tuple = (), ris_threshold: float = 0.5):
        self.argv = list(argv)
        self.name = name
        self.version = version
        self.capabilities = tuple(capabilities)
        self.ris_threshold = ris_threshold
        self._proc: Optional[subprocess.Popen] = None
        self._lock = threading.Lock()

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True
            )
        return self._proc

    def invoke(self, request: CapabilityRequest, timeout: float) -> CapabilityResponse:
        with self._lock:
            proc = self._ensure_proc()
            line = json.dumps(request.to_wire(), separators=(",", ":"))
            result: List[str] = []

            def pump():
                proc.stdin.write(line + "\n")
                proc.stdin.flush()
                result.append(proc.stdout.readline())

            worker = threading.Thread(target=pump, daemon=True)
            worker.start()
            worker.join(timeout)
            if worker.is_alive():
                proc.kill()
                self._proc = None
                raise Timeout(f"{request.capability}: subprocess timed out after {timeout}s")
            if not result or not result[0]:
                raise TransportError(f"{request.capability}: subprocess closed the pipe")
            return CapabilityResponse.from_bytes(result[0].encode("utf-8"))

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.terminate()
        self._proc = None


class BackendSet:
    """Maps each capability to the backend serving it (first declaration wins)."""

    def __init__(self, backends: List[BackendHandle]):
        self.backends = list(backends)
        self._by_capability: Dict[str, BackendHandle] = {}
        for backend in backends:
            for cap in backend.capabilities:
                self._by_capability.setdefault(cap, backend)

    def supports(self, capability: str) -> bool:
        return capability in self._by_capability

    def for_capability(self, capability: str) -> BackendHandle:
        backend = self._by_capability.get(capability)
        if backend is None:
            raise UnsupportedCapability(f"no backend provides {capability}")
        return backend


def load_roster(path: str) -> BackendSet:
    """Load a backends.toml roster into a BackendSet."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read roster {path}: {exc}") from exc

    backends: List[BackendHandle] = []
    for entry in doc.get("backend", []):
        transport = entry.get("transport")
        common = dict(
            name=entry.get("name", "backend"),
            version=str(entry.get("version", "0")),
            capabilities=tuple(entry.get("capabilities", ())),
            ris_threshold=float(entry.get("ris_threshold", 0.5)),
        )
        if transport == "http":
            if entry.get("capabilities"):
                backends.append(HttpBackend(url=entry["url"], **common))
            else:
                backends.append(HttpBackend.from_meta(entry["url"]))
        elif transport == "subprocess":
            backends.append(SubprocessBackend(argv=entry["argv"], **common))
        elif transport == "mock":
            backend = MockBackend(name=common["name"], version=common["version"],
                                  ris_threshold=common["ris_threshold"])
            fixtures = entry.get("fixtures")
            if fixtures:
                import os

                fixture_path = fixtures
                if not os.path.isabs(fixture_path):
                    fixture_path = os.path.join(os.path.dirname(os.path.abspath(path)), fixtures)
                with open(fixture_path, "r", encoding="utf-8") as fh:
                    tables = json.load(fh)
                for capability, table in tables.items():
                    register_mock(backend, capability, table)
            backends.append(backend)
        else:
            raise ConfigError(f"{path}: unknown transport {transport!r}")
    if not backends:
        raise ConfigError(f"{path}: roster declares no backends")
    return BackendSet(backends)
