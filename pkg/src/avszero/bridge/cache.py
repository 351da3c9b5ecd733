"""Content-addressed response cache for deterministic experiment reruns.

Keys hash (backend name, backend version, capability, canonicalized payload
hashes); entries store the raw response envelope bytes so a hit is
byte-identical to the original response. Writes are atomic via rename.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from typing import Tuple

from .protocol import CapabilityRequest, CapabilityResponse

log = logging.getLogger(__name__)


def cache_key(backend_name: str, backend_version: str, request: CapabilityRequest) -> str:
    canonical = json.dumps(
        {
            "backend": backend_name,
            "version": backend_version,
            "capability": request.capability,
            "parts": request.fingerprint_parts(),
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ResponseCache:
    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, key[:2], key + ".json")

    def get(self, key: str):
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "rb") as fh:
                return CapabilityResponse.from_bytes(fh.read())
        except Exception as exc:
            log.warning("cache entry %s unreadable (%s); treating as miss", key, exc)
            return None

    def put(self, key: str, response: CapabilityResponse) -> None:
        path = self._path(key)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(response.to_bytes())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def lookup_or_call(self, backend, request: CapabilityRequest) -> Tuple[CapabilityResponse, bool]:
        """Return (response, hit). Misses invoke the backend and store the result."""
        from .backends import call  # local import to avoid a cycle

        key = cache_key(backend.name, backend.version, request)
        cached = self.get(key)
        if cached is not None:
            self.hits += 1
            return cached, True
        self.misses += 1
        response = call(backend, request)
        self.put(key, response)
        return response, False


def default_cache_dir() -> str:
    return os.environ.get("AVSZ_CACHE_DIR", os.path.join(os.path.expanduser("~"), ".cache", "avszero"))
