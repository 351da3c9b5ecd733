"""Command-line entry points: ``serve`` and ``conformance``."""

from __future__ import annotations

import argparse
import logging
import sys

from .app import create_app
from .models import default_registry, registry_from_config
from .wire import WireError

log = logging.getLogger("avs_sidecar")


def _registry(args):
    if args.config:
        return registry_from_config(args.config)
    return default_registry()


def cmd_serve(args) -> int:
    import uvicorn

    try:
        registry = _registry(args)
    except (OSError, WireError) as exc:
        log.error("cannot build model registry: %s", exc)
        return 1
    uvicorn.run(create_app(registry), host=args.host, port=args.port)
    return 0


def cmd_conformance(args) -> int:
    from .conformance import run_conformance

    if args.url:
        import httpx

        client = httpx.Client(base_url=args.url)
    else:
        from fastapi.testclient import TestClient

        try:
            client = TestClient(create_app(_registry(args)))
        except (OSError, WireError) as exc:
            log.error("cannot build model registry: %s", exc)
            return 1
    report = run_conformance(client, args.golden_dir)
    print(report.render())
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avs-sidecar",
                                     description="Reference model-server sidecar")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8800)
    serve.add_argument("--config", help="TOML model registry (defaults to reference models)")
    serve.set_defaults(func=cmd_serve)

    conf = sub.add_parser("conformance", help="replay golden fixtures and validate")
    conf.add_argument("--golden-dir", required=True)
    conf.add_argument("--url", help="check a remote server instead of in-process")
    conf.add_argument("--config")
    conf.set_defaults(func=cmd_conformance)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
