"""Command-line entry points: ``run``, ``eval`` and ``report``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from . import maskio
from .bridge import ResponseCache, load_roster
from .errors import AvsError, ConfigError
from .evaluate import evaluate_predictions
from .inversion import InversionConfig
from .manifest import load_manifest, validate_sample
from .metrics import MetricConfig
from .strategy import (
    REQUIRED_CAPABILITIES,
    PromptTemplate,
    StrategyContext,
    run_strategy,
)
from .types import STRATEGY_NAMES

log = logging.getLogger("avszero")


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _metric_config(doc: dict, args) -> MetricConfig:
    section = doc.get("metrics", {})
    return MetricConfig(
        beta_squared=float(section.get("beta_squared", 0.3)),
        auc_step=float(section.get("auc_step", 0.05)),
        jf_threshold=float(getattr(args, "jf_threshold", None) or section.get("jf_threshold", 0.5)),
        ciou_strict=bool(section.get("ciou_strict", True)),
    )


def _inversion_config(doc: dict) -> InversionConfig:
    section = doc.get("inversion", {})
    return InversionConfig(
        num_tokens=int(section.get("num_tokens", 4)),
        step_size=float(section.get("step_size", 0.2)),
        max_iters=int(section.get("max_iters", 500)),
        tol=float(section.get("tol", 1e-6)),
        seed=int(section.get("seed", 0)),
    )


def _record_to_json(record, map_relpath: Optional[str]) -> dict:
    out = {"sample_id": record.sample_id, "strategy": record.strategy}
    if record.error is not None:
        out["error"] = record.error
        return out
    out["derived_text"] = record.derived_text
    if record.embedding is not None:
        out["embedding"] = [[float(x) for x in row] for row in record.embedding]
    out["score_map"] = map_relpath
    out["ris_threshold"] = record.ris_threshold
    out["trace"] = record.trace
    return out


def cmd_run(args) -> int:
    doc = _load_config_file(args.config)
    try:
        samples = load_manifest(args.manifest, strict=args.strict)
        backends = load_roster(args.backend_roster)
    except AvsError as exc:
        log.error("%s", exc)
        return 1

    for capability in REQUIRED_CAPABILITIES[args.strategy]:
        if not backends.supports(capability):
            log.error("preflight: no backend provides %s (required by %s)",
                      capability, args.strategy)
            return 1

    cache = ResponseCache(args.cache_dir) if args.cache_dir else None
    ctx = StrategyContext(
        backends=backends,
        cache=cache,
        template=PromptTemplate(args.prompt_template),
        inversion_config=_inversion_config(doc),
    )

    os.makedirs(args.output, exist_ok=True)
    maps_dir = os.path.join(args.output, "maps")
    os.makedirs(maps_dir, exist_ok=True)

    for sample in samples:
        for warning in validate_sample(sample):
            log.warning("%s", warning)

    def worker(sample):
        try:
            return run_strategy(args.strategy, sample, ctx)
        except AvsError as exc:
            from .types import PredictionRecord

            return PredictionRecord(sample_id=sample.sample_id, strategy=args.strategy,
                                    error=f"{type(exc).__name__}: {exc}")

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            records = list(pool.map(worker, samples))  # results buffered in manifest order
    else:
        records = [worker(s) for s in samples]

    n_ok = 0
    predictions_path = os.path.join(args.output, "predictions.ndjson")
    timings_path = os.path.join(args.output, "timings.ndjson")
    # Timings live in a sidecar file so predictions.ndjson is byte-stable
    # across reruns with identical inputs.
    with open(predictions_path, "w", encoding="utf-8") as pred_fh, \
            open(timings_path, "w", encoding="utf-8") as time_fh:
        for record in records:
            map_rel = None
            if record.error is None and record.score_map is not None:
                map_rel = os.path.join("maps", f"{record.sample_id}.avss")
                maskio.write_scoremap(record.score_map, os.path.join(args.output, map_rel))
                n_ok += 1
            pred_fh.write(json.dumps(_record_to_json(record, map_rel), sort_keys=True) + "\n")
            time_fh.write(json.dumps(
                {"sample_id": record.sample_id, "timings_ms": record.timings_ms},
                sort_keys=True) + "\n")

    log.info("wrote %d records (%d ok) to %s", len(records), n_ok, predictions_path)
    return 0 if n_ok >= 1 else 2


def cmd_eval(args) -> int:
    doc = _load_config_file(args.config)
    config = _metric_config(doc, args)
    try:
        samples = {s.sample_id: s for s in load_manifest(args.manifest)}
    except AvsError as exc:
        log.error("%s", exc)
        return 1

    predictions_path = args.predictions
    if os.path.isdir(predictions_path):
        predictions_path = os.path.join(predictions_path, "predictions.ndjson")
    base = os.path.dirname(os.path.abspath(predictions_path))

    entries = []
    strategy = None
    n_errors = 0
    with open(predictions_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            strategy = rec.get("strategy", strategy)
            if rec.get("error") or not rec.get("score_map"):
                n_errors += 1
                continue
            score_map = maskio.read_scoremap(os.path.join(base, rec["score_map"]))
            entries.append((rec["sample_id"], score_map, float(rec.get("ris_threshold") or 0.5)))

    try:
        report, per_sample = evaluate_predictions(entries, samples, config)
    except AvsError as exc:
        log.error("%s", exc)
        return 1

    payload = {
        "strategy": strategy,
        "aggregate": report.to_dict(),
        "n_errors": n_errors,
        "per_sample": [vars(m) for m in per_sample],
    }
    out = args.output or "report.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("report written to %s", out)
    return 0


_COLUMNS = (("ciou", "cIoU"), ("auc", "AUC"), ("miou", "mIoU"),
            ("fscore", "Fscore"), ("j", "J"), ("f", "F"))


def render_report(reports: List[dict], fmt: str) -> str:
    """Render aggregate reports as a markdown table (percent, one decimal) or JSON."""
    if fmt == "json":
        return json.dumps(reports, indent=2, sort_keys=True)
    header = "| Strategy | " + " | ".join(label for _, label in _COLUMNS) + " |"
    rule = "|" + "---|" * (len(_COLUMNS) + 1)
    rows = [header, rule]
    for rep in reports:
        agg = rep.get("aggregate", rep)
        cells = [f"{100.0 * float(agg[key]):.1f}" for key, _ in _COLUMNS]
        rows.append("| " + " | ".join([str(rep.get("strategy", "-"))] + cells) + " |")
    return "\n".join(rows)


def cmd_report(args) -> int:
    reports = []
    for path in args.report:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            log.error("cannot parse report %s: %s", path, exc)
            return 1
        reports.extend(doc if isinstance(doc, list) else [doc])
    reports.sort(key=lambda r: str(r.get("strategy", "")))
    print(render_report(reports, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avszero",
                                     description="Zero-shot AVS pipeline engine")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a strategy over a manifest")
    run.add_argument("--manifest", required=True)
    run.add_argument("--strategy", required=True, choices=STRATEGY_NAMES)
    run.add_argument("--backend-roster", required=True)
    run.add_argument("--cache-dir", default=os.environ.get("AVSZ_CACHE_DIR"))
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--output", required=True)
    run.add_argument("--prompt-template", default="a photo of {c}.")
    run.add_argument("--config", help="TOML config file (flags win)")
    run.add_argument("--strict", action="store_true",
                     help="require every referenced asset to exist")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="score predictions against GT masks")
    ev.add_argument("--predictions", required=True,
                    help="predictions.ndjson or the run output directory")
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--output", default="report.json")
    ev.add_argument("--jf-threshold", type=float, default=None,
                    help="override the per-backend threshold for J/F")
    ev.add_argument("--config")
    ev.set_defaults(func=cmd_eval)

    rep = sub.add_parser("report", help="render aggregate reports")
    rep.add_argument("report", nargs="+")
    rep.add_argument("--format", choices=("json", "md"), default="md")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        log.error("workers must be >= 1")
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
