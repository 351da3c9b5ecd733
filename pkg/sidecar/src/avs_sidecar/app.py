"""FastAPI application: POST /v1/<capability>, GET /v1/meta."""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .models import ModelRegistry, default_registry
from .wire import CAPABILITIES, WireError, check_payloads, parse_request

log = logging.getLogger("avs_sidecar")


def create_app(registry: ModelRegistry | None = None) -> FastAPI:
    registry = registry if registry is not None else default_registry()
    app = FastAPI(title=registry.name, version=registry.version)

    @app.get("/v1/meta")
    def meta():
        return registry.meta()

    @app.post("/v1/{capability}")
    async def invoke(capability: str, request: Request):
        try:
            envelope = await request.json()
        except Exception:
            return _error("request body is not valid JSON", status=400)
        try:
            if capability not in CAPABILITIES:
                return _error(f"unknown capability {capability!r}", status=404)
            parsed_capability, sample_id, payloads = parse_request(envelope)
            if parsed_capability != capability:
                raise WireError(
                    f"envelope capability {parsed_capability!r} does not match URL")
            if capability not in registry.capabilities:
                raise WireError(f"capability {capability!r} not served")
            check_payloads(capability, payloads)
            body = registry.handle(capability, sample_id, payloads)
        except WireError as exc:
            return _error(str(exc), status=400)
        except Exception as exc:  # model failure -> protocol error response
            log.exception("handler for %s failed", capability)
            return _error(f"model failure: {exc}", status=500)
        return {"status": "ok", "body": body}

    return app


def _error(message: str, status: int) -> JSONResponse:
    return JSONResponse({"status": "error", "error_message": message},
                        status_code=status)
