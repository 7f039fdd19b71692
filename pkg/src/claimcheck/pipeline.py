"""End-to-end pipeline: ingest, attribute, verify, recalibrate, aggregate.

Data flow per claim: evidence attribution (full passage or extracted span),
entailment classification per pairing (through the verdict cache when one
is configured), confidence recalibration at the run threshold, and
aggregation into one claim-level verdict. The uncalibrated baseline is the
same code path at threshold 0.0.

Claims are processed with bounded parallelism; the verdict stream is
ordered by claim id regardless of completion order, so worker count can
never change the output bytes. A claim whose processing fails degrades to a
recorded NOT_ENOUGH_INFO verdict annotated with the failing stage; it never
aborts the run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

from .aggregation import (
    AggregationMethod,
    FinalVerdict,
    aggregate_majority,
    aggregate_weighted,
)
from .attribution import (
    AttributedEvidence,
    AttributionMode,
    attribute_full,
    attribute_span,
    score_attribution,
)
from .backends.base import (
    TRUNCATION_POLICY_VERSION,
    NLIClassifier,
    SpanExtractor,
    TextEmbedder,
)
from .backends.cache import CachingClassifier, VerdictCache
from .backends.stub import StubEmbedder, StubNLIClassifier, StubSpanExtractor
from .calibration import recalibrate, validate_threshold
from .core import (
    PACKAGE_VERSION,
    Claim,
    ConfigError,
    Dataset,
    DatasetError,
    EvidencePassage,
    VerdictLabel,
)
from .evaluation import EvaluationReport, compute_metrics, render_report
from .ingestion import load_dataset
from .verification import RawVerdict, verify_pair

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "CLAIMCHECK_CACHE_DIR"

DEFAULT_SWEEP_GRID = (0.6, 0.7, 0.8, 0.9)


class BackendKind(str, Enum):
    STUB = "stub"
    LOCAL_MODEL = "local-model"
    REMOTE_ENDPOINT = "remote-endpoint"


def default_cache_dir() -> str:
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return env
    return str(Path.home() / ".cache" / "claimcheck")


@dataclass(frozen=True)
class PipelineConfig:
    """Full run configuration. Field names double as the flat config-file
    keys and (dash-separated) CLI flag names."""

    data_path: str = ""
    dataset: Dataset = Dataset.CUSTOM
    attribution: AttributionMode = AttributionMode.FULL
    threshold: float = 0.6
    thresholds: tuple[float, ...] = DEFAULT_SWEEP_GRID
    aggregation: AggregationMethod = AggregationMethod.MAJORITY
    backend: BackendKind = BackendKind.STUB
    model: str = "microsoft/deberta-large-mnli"
    extractor_model: str = "deepset/roberta-base-squad2-distilled"
    embedder_model: str | None = None
    endpoint_url: str | None = None
    cache_dir: str | None = None
    out_dir: str | None = None
    report_format: str = "json"
    workers: int = 1
    seed: int = 0
    max_length: int = 512

    def __post_init__(self) -> None:
        try:
            validate_threshold(self.threshold)
            for value in self.thresholds:
                validate_threshold(value)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.thresholds:
            raise ConfigError("thresholds grid must be non-empty")
        if self.report_format not in ("json", "csv", "md"):
            raise ConfigError(
                f"report_format must be json, csv, or md, got {self.report_format!r}"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.max_length < 1:
            raise ConfigError(f"max_length must be >= 1, got {self.max_length}")
        if self.backend is BackendKind.REMOTE_ENDPOINT and not self.endpoint_url:
            raise ConfigError("backend remote-endpoint requires endpoint_url")

    def fingerprint(self) -> str:
        """Hash of the result-determining configuration. Worker count and
        output/cache locations are excluded: they may never change results
        (that is an invariant, not an assumption)."""
        determining = {
            "data_path": self.data_path,
            "dataset": self.dataset.value,
            "attribution": self.attribution.value,
            "threshold": self.threshold,
            "aggregation": self.aggregation.value,
            "backend": self.backend.value,
            "model": self.model,
            "extractor_model": self.extractor_model,
            "embedder_model": self.embedder_model,
            "endpoint_url": self.endpoint_url,
            "seed": self.seed,
            "max_length": self.max_length,
            "truncation_policy": TRUNCATION_POLICY_VERSION,
        }
        canonical = json.dumps(determining, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


@dataclass
class Backends:
    classifier: NLIClassifier
    extractor: SpanExtractor | None
    embedder: TextEmbedder | None
    cache: VerdictCache | None

    @property
    def inference_calls(self) -> int:
        if isinstance(self.classifier, CachingClassifier):
            return self.classifier.inference_calls
        return self.classifier.calls


def build_backends(config: PipelineConfig) -> Backends:
    """Construct the classifier/extractor/embedder trio for the configured
    backend kind, wrapping the classifier with the verdict cache when a
    cache directory is configured."""
    if config.backend is BackendKind.STUB:
        classifier: NLIClassifier = StubNLIClassifier(
            seed=config.seed, max_length=config.max_length
        )
        extractor: SpanExtractor | None = StubSpanExtractor()
        embedder: TextEmbedder | None = (
            StubEmbedder(seed=config.seed) if config.embedder_model else None
        )
    elif config.backend is BackendKind.LOCAL_MODEL:
        from .backends.local import LocalEmbedder, LocalNLIClassifier, LocalSpanExtractor

        classifier = LocalNLIClassifier(
            model_id=config.model, max_length=config.max_length
        )
        extractor = (
            LocalSpanExtractor(model_id=config.extractor_model)
            if config.attribution is AttributionMode.SPAN
            else None
        )
        embedder = (
            LocalEmbedder(model_id=config.embedder_model)
            if config.embedder_model
            else None
        )
    else:
        from .backends.remote import RemoteEmbedder, RemoteNLIClassifier, RemoteSpanExtractor

        assert config.endpoint_url is not None
        classifier = RemoteNLIClassifier(
            base_url=config.endpoint_url,
            model_id=config.model,
            max_length=config.max_length,
        )
        extractor = (
            RemoteSpanExtractor(
                base_url=config.endpoint_url, model_id=config.extractor_model
            )
            if config.attribution is AttributionMode.SPAN
            else None
        )
        embedder = (
            RemoteEmbedder(
                base_url=config.endpoint_url,
                model_id=config.embedder_model,
                dimension=384,
            )
            if config.embedder_model
            else None
        )
    cache: VerdictCache | None = None
    if config.cache_dir:
        cache = VerdictCache(config.cache_dir)
        classifier = CachingClassifier(classifier, cache)
    return Backends(
        classifier=classifier, extractor=extractor, embedder=embedder, cache=cache
    )


@dataclass
class ClaimResult:
    """Everything the pipeline knows about one processed claim."""

    claim: Claim
    items: list[AttributedEvidence] = field(default_factory=list)
    raw_verdicts: list[RawVerdict] = field(default_factory=list)
    error_stage: str | None = None
    error_message: str | None = None

    @property
    def failed(self) -> bool:
        return self.error_stage is not None

    def weights(self) -> list[float] | None:
        """Attribution scores clamped at zero; uniform (None) when nothing
        survives the clamp or no scores were assigned."""
        clamped = [max(0.0, item.attribution_score) for item in self.items]
        if not clamped or sum(clamped) == 0.0:
            return None
        return clamped

    def final_at(self, threshold: float, method: AggregationMethod) -> FinalVerdict:
        calibrated = [recalibrate(raw, threshold) for raw in self.raw_verdicts]
        if method is AggregationMethod.MAJORITY:
            return aggregate_majority(calibrated)
        return aggregate_weighted(calibrated, self.weights())

    def predicted_label(self, threshold: float, method: AggregationMethod) -> VerdictLabel:
        if self.failed:
            return VerdictLabel.NOT_ENOUGH_INFO
        return self.final_at(threshold, method).label


def process_claim(
    claim: Claim,
    passages: list[EvidencePassage],
    config: PipelineConfig,
    backends: Backends,
) -> ClaimResult:
    """Run one claim through attribution and verification, capturing any
    failure as a stage-annotated degraded result instead of raising."""
    result = ClaimResult(claim=claim)
    stage = "attribution"
    try:
        if config.attribution is AttributionMode.SPAN:
            if backends.extractor is None:
                raise ConfigError("span attribution requires an extractor backend")
            items = attribute_span(claim, passages, backends.extractor)
        else:
            items = attribute_full(claim, passages)
        if backends.embedder is not None:
            stage = "scoring"
            items = [score_attribution(item, backends.embedder) for item in items]
        result.items = items
        stage = "verification"
        result.raw_verdicts = [verify_pair(item, backends.classifier) for item in items]
    except Exception as exc:  # noqa: BLE001 - per-claim isolation is the contract
        logger.warning("claim %s failed at %s: %s", claim.id, stage, exc)
        result.items = []
        result.raw_verdicts = []
        result.error_stage = stage
        result.error_message = f"{type(exc).__name__}: {exc}"
    return result


def _row_for(result: ClaimResult, config: PipelineConfig) -> dict:
    """Serialize one claim outcome as a verdict-stream record."""
    claim = result.claim
    row: dict = {
        "claim_id": claim.id,
        "threshold": config.threshold,
        "evidence_mode": config.attribution.value,
    }
    if claim.gold_label is not None:
        row["gold_label"] = claim.gold_label.value
    if result.failed:
        row.update(
            {
                "label": VerdictLabel.NOT_ENOUGH_INFO.value,
                "confidence": 0.0,
                "downgraded": False,
                "per_evidence": [],
                "error": {"stage": result.error_stage, "message": result.error_message},
            }
        )
        return row
    final = result.final_at(config.threshold, config.aggregation)
    per_evidence = []
    for item, raw, calibrated in zip(result.items, result.raw_verdicts, final.inputs):
        entry = {
            "evidence_id": raw.evidence_id,
            "label": calibrated.label.value,
            "raw_label": raw.label.value,
            "confidence": raw.confidence,
            "probs": {
                "supported": raw.probs.p_supported,
                "refuted": raw.probs.p_refuted,
                "nei": raw.probs.p_nei,
            },
            "downgraded": calibrated.downgraded,
            "attribution_score": item.attribution_score,
            "fallback": item.fallback,
            "truncated": raw.truncated,
        }
        if item.span_text is not None:
            entry["span"] = {
                "text": item.span_text,
                "start": item.span_start,
                "end": item.span_end,
            }
        per_evidence.append(entry)
    row.update(
        {
            "label": final.label.value,
            "confidence": final.confidence,
            "downgraded": any(v.downgraded for v in final.inputs),
            "per_evidence": per_evidence,
        }
    )
    return row


@dataclass
class RunResult:
    config: PipelineConfig
    results: list[ClaimResult]
    rows: list[dict]
    report: EvaluationReport | None
    manifest: dict

    def verdict_lines(self) -> str:
        return "".join(json.dumps(row, sort_keys=True) + "\n" for row in self.rows)


def _evaluate(
    results: Sequence[ClaimResult], threshold: float, method: AggregationMethod,
    fingerprint: str,
) -> EvaluationReport | None:
    """Score claims that carry gold labels; failed claims count as
    NOT_ENOUGH_INFO predictions so failures stay visible in the report."""
    scored = [r for r in results if r.claim.gold_label is not None]
    if not scored:
        return None
    predictions = [r.predicted_label(threshold, method) for r in scored]
    gold = [r.claim.gold_label for r in scored]
    return compute_metrics(predictions, gold, config_fingerprint=fingerprint)


def _execute(
    config: PipelineConfig, backends: Backends
) -> tuple[list[ClaimResult], dict]:
    """Shared inference pass: load data, process every claim, build the
    manifest skeleton. Returns results ordered by claim id."""
    if not config.data_path:
        raise ConfigError("data_path is required")
    started = time.monotonic()
    load = load_dataset(config.data_path, config.dataset)
    pairs = load.to_claims()
    if not pairs:
        raise DatasetError(
            f"no usable records in {load.path} "
            f"({load.rejected} of {load.total_lines} lines rejected)"
        )
    workers = max(1, min(config.workers, backends.classifier.declared_max_in_flight))
    if workers == 1 or len(pairs) <= 1:
        results = [
            process_claim(claim, passages, config, backends)
            for claim, passages in pairs
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda cp: process_claim(cp[0], cp[1], config, backends), pairs
                )
            )
    results.sort(key=lambda r: r.claim.id)
    claim_ids = [r.claim.id for r in results]
    if len(set(claim_ids)) != len(claim_ids):
        raise RuntimeError("claim ids are not unique within the run")
    manifest = {
        "package_version": PACKAGE_VERSION,
        "config_fingerprint": config.fingerprint(),
        "config": config.to_dict(),
        "truncation_policy": TRUNCATION_POLICY_VERSION,
        "dataset": {
            "path": load.path,
            "kind": load.dataset.value,
            "total_lines": load.total_lines,
            "accepted": load.accepted,
            "rejected": load.rejected,
            "class_distribution": load.class_distribution(),
        },
        "backend": {
            "kind": config.backend.value,
            "classifier_model": backends.classifier.model_id,
            "separator": backends.classifier.separator,
            "extractor_model": (
                backends.extractor.model_id if backends.extractor else None
            ),
            "embedder_model": (
                backends.embedder.model_id if backends.embedder else None
            ),
        },
        "counts": {
            "claims": len(results),
            "failures": sum(1 for r in results if r.failed),
        },
        "inference_calls": backends.inference_calls,
        "cache": (
            {
                "hits": backends.classifier.hits,
                "misses": backends.classifier.misses,
                "quarantined": backends.cache.quarantined,
            }
            if isinstance(backends.classifier, CachingClassifier)
            and backends.cache is not None
            else None
        ),
        "wall_seconds": round(time.monotonic() - started, 6),
    }
    return results, manifest


def _write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def run(config: PipelineConfig, backends: Backends | None = None) -> RunResult:
    """Execute one full pipeline pass at config.threshold.

    When out_dir is set, writes verdicts.jsonl (ordered by claim id),
    manifest.json, and report.<fmt> when gold labels were present.
    """
    backends = backends or build_backends(config)
    results, manifest = _execute(config, backends)
    rows = [_row_for(result, config) for result in results]
    report = _evaluate(
        results, config.threshold, config.aggregation, config.fingerprint()
    )
    manifest["counts"]["scored_claims"] = report.n if report else 0
    manifest["counts"]["downgraded_claims"] = sum(
        1 for row in rows if row.get("downgraded")
    )
    outcome = RunResult(
        config=config, results=results, rows=rows, report=report, manifest=manifest
    )
    if config.out_dir:
        out = Path(config.out_dir)
        _write_text(out / "verdicts.jsonl", outcome.verdict_lines())
        _write_text(
            out / "manifest.json",
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )
        if report is not None:
            suffix = config.report_format
            _write_text(
                out / f"report.{suffix}", render_report(report, config.report_format)
            )
    return outcome


@dataclass
class SweepResult:
    config: PipelineConfig
    reports: list[tuple[float, EvaluationReport]]
    manifest: dict


def sweep(
    config: PipelineConfig,
    thresholds: Sequence[float] | None = None,
    backends: Backends | None = None,
) -> SweepResult:
    """One inference pass, then recalibrate and evaluate at every threshold.

    Recalibration and aggregation consume the stored probability vectors, so
    the classifier is invoked exactly as many times as a single run (and
    zero times when the verdict cache is already warm for this config).
    """
    grid = tuple(thresholds) if thresholds else config.thresholds
    for value in grid:
        validate_threshold(value)
    backends = backends or build_backends(config)
    results, manifest = _execute(config, backends)
    fingerprint = config.fingerprint()
    reports: list[tuple[float, EvaluationReport]] = []
    for threshold in sorted(set(float(t) for t in grid)):
        report = _evaluate(results, threshold, config.aggregation, fingerprint)
        if report is None:
            raise DatasetError(
                "sweep requires gold labels; none were found in the dataset"
            )
        reports.append((threshold, report))
    manifest["sweep_thresholds"] = [t for t, _ in reports]
    outcome = SweepResult(config=config, reports=reports, manifest=manifest)
    if config.out_dir:
        out = Path(config.out_dir)
        for threshold, report in reports:
            _write_text(
                out / f"report_tau_{threshold:g}.{config.report_format}",
                render_report(report, config.report_format),
            )
        summary = {
            "config_fingerprint": fingerprint,
            "rows": [
                {"threshold": threshold, **_sweep_row(report)}
                for threshold, report in reports
            ],
        }
        _write_text(
            out / "sweep_summary.json",
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
        )
        _write_text(
            out / "manifest.json",
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )
    return outcome


def _sweep_row(report: EvaluationReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "macro_f1": report.macro.f1,
        "weighted_f1": report.weighted.f1,
        "nei_predictions": report.per_class[VerdictLabel.NOT_ENOUGH_INFO].predicted,
    }


@dataclass
class AblateResult:
    config: PipelineConfig
    cells: dict[tuple[str, float], EvaluationReport]
    manifests: dict[str, dict]


def ablate(
    config: PipelineConfig,
    modes: Sequence[AttributionMode] | None = None,
    thresholds: Sequence[float] | None = None,
) -> AblateResult:
    """Attribution-mode x threshold matrix. Inference runs once per mode;
    thresholds within a mode reuse that pass's verdicts."""
    modes = list(modes) if modes else [AttributionMode.FULL, AttributionMode.SPAN]
    grid = tuple(thresholds) if thresholds else config.thresholds
    cells: dict[tuple[str, float], EvaluationReport] = {}
    manifests: dict[str, dict] = {}
    for mode in modes:
        mode_config = replace(config, attribution=mode, out_dir=None)
        outcome = sweep(mode_config, grid)
        manifests[mode.value] = outcome.manifest
        for threshold, report in outcome.reports:
            cells[(mode.value, threshold)] = report
    if config.out_dir:
        out = Path(config.out_dir)
        summary = {
            "rows": [
                {
                    "attribution": mode_value,
                    "threshold": threshold,
                    **_sweep_row(report),
                }
                for (mode_value, threshold), report in sorted(cells.items())
            ]
        }
        _write_text(
            out / "ablation_summary.json",
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
        )
        _write_text(
            out / "manifest.json",
            json.dumps(manifests, indent=2, sort_keys=True) + "\n",
        )
    return AblateResult(config=config, cells=cells, manifests=manifests)
