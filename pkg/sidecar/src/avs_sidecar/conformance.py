"""Golden-fixture conformance runner.

Replays every request envelope in a golden directory against a live server
(anything with a ``post(path, json=...)`` / ``get(path)`` interface, e.g. an
httpx or fastapi test client) and validates responses against the capability
schemas. Failures are collected into the report, never raised.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import List, Tuple

from .wire import WireError, parse_request, validate_body

_META_REQUIRED = ("name", "version", "capabilities", "ris_threshold")


@dataclass
class ConformanceReport:
    checks: List[Tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, ok, detail))

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def render(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'}  {name}" + (f": {detail}" if detail else "")
                 for name, ok, detail in self.checks]
        verdict = "PASS" if self.passed else "FAIL"
        return "\n".join(lines + [f"conformance: {verdict} "
                                  f"({sum(ok for _, ok, _ in self.checks)}/{len(self.checks)})"])


def _check_meta(client, report: ConformanceReport) -> dict:
    resp = client.get("/v1/meta")
    if resp.status_code != 200:
        report.add("meta", False, f"HTTP {resp.status_code}")
        return {}
    meta = resp.json()
    for key in _META_REQUIRED:
        if key not in meta:
            report.add("meta", False, f"missing field {key!r}")
            return meta
    if not isinstance(meta["capabilities"], list) or not meta["capabilities"]:
        report.add("meta", False, "capabilities must be a non-empty list")
        return meta
    if not isinstance(meta["ris_threshold"], (int, float)):
        report.add("meta", False, "ris_threshold must be a number")
        return meta
    report.add("meta", True)
    return meta


def _check_golden(client, path: str, served, report: ConformanceReport) -> None:
    name = os.path.basename(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            envelope = json.load(fh)
        capability, _, payloads = parse_request(envelope)
    except (OSError, json.JSONDecodeError, WireError) as exc:
        report.add(name, False, f"unreadable golden: {exc}")
        return
    if served is not None and capability not in served:
        report.add(name, False, f"{capability} not in declared capabilities")
        return
    resp = client.post(f"/v1/{capability}", json=envelope)
    if resp.status_code != 200:
        report.add(name, False, f"HTTP {resp.status_code}: {resp.text[:200]}")
        return
    doc = resp.json()
    if doc.get("status") != "ok" or not isinstance(doc.get("body"), dict):
        report.add(name, False, f"bad envelope: {json.dumps(doc)[:200]}")
        return
    try:
        validate_body(capability, doc["body"], payloads)
    except WireError as exc:
        report.add(name, False, f"schema: {exc}")
        return
    report.add(name, True)


def _check_openvocab_ordering(client, golden_dir: str, report: ConformanceReport) -> None:
    """Scores must track candidate order: reversing candidates reverses scores."""
    for capability in ("audio_classify_openvocab", "image_classify_openvocab"):
        path = os.path.join(golden_dir, capability + ".json")
        if not os.path.exists(path):
            continue
        with open(path, "r", encoding="utf-8") as fh:
            envelope = json.load(fh)
        reversed_env = json.loads(json.dumps(envelope))
        reversed_env["payloads"]["candidates"]["value"] = list(
            reversed(envelope["payloads"]["candidates"]["value"]))
        forward = client.post(f"/v1/{capability}", json=envelope)
        backward = client.post(f"/v1/{capability}", json=reversed_env)
        name = f"{capability} ordering"
        if forward.status_code != 200 or backward.status_code != 200:
            report.add(name, False, "request failed")
            continue
        fw = forward.json().get("body", {}).get("scores")
        bw = backward.json().get("body", {}).get("scores")
        if fw is None or bw is None or list(reversed(fw)) != bw:
            report.add(name, False, f"{fw} vs reversed {bw}")
        else:
            report.add(name, True)


def run_conformance(client, golden_dir: str) -> ConformanceReport:
    report = ConformanceReport()
    meta = _check_meta(client, report)
    served = meta.get("capabilities") if isinstance(meta.get("capabilities"), list) else None
    goldens = sorted(
        os.path.join(golden_dir, f) for f in os.listdir(golden_dir) if f.endswith(".json"))
    if not goldens:
        report.add("goldens", False, f"no golden fixtures in {golden_dir}")
        return report
    for path in goldens:
        _check_golden(client, path, served, report)
    _check_openvocab_ordering(client, golden_dir, report)
    return report
