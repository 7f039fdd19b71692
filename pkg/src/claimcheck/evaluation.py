"""Metrics, threshold sweeps, and report rendering.

compute_metrics implements per-class precision/recall/F1 plus macro,
weighted, and accuracy aggregates from first principles. The undefined
cases use the 0/0 -> 0 convention and are counted per class, never hidden.
Sweeps are pure recomputation over already-classified verdicts: no step in
this module can trigger model inference.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .aggregation import AggregationMethod, aggregate_majority, aggregate_weighted
from .calibration import recalibrate
from .core import CLASS_ORDER, VerdictLabel
from .verification import RawVerdict


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int  # gold instances of the class
    predicted: int  # instances predicted as the class


@dataclass(frozen=True)
class Averages:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    """Classification quality of one run against gold labels."""

    per_class: dict[VerdictLabel, ClassMetrics]
    macro: Averages
    weighted: Averages
    accuracy: float
    n: int
    config_fingerprint: str = ""
    zero_division_counts: dict[VerdictLabel, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "per_class": {
                label.value: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                    "predicted": m.predicted,
                }
                for label, m in self.per_class.items()
            },
            "macro": {
                "precision": self.macro.precision,
                "recall": self.macro.recall,
                "f1": self.macro.f1,
            },
            "weighted": {
                "precision": self.weighted.precision,
                "recall": self.weighted.recall,
                "f1": self.weighted.f1,
            },
            "zero_division_counts": {
                label.value: count
                for label, count in self.zero_division_counts.items()
                if count
            },
            "config_fingerprint": self.config_fingerprint,
        }


def report_from_dict(payload: dict) -> EvaluationReport:
    """Inverse of EvaluationReport.to_dict (for saved json report files)."""
    per_class: dict[VerdictLabel, ClassMetrics] = {}
    for label in CLASS_ORDER:
        entry = payload["per_class"][label.value]
        per_class[label] = ClassMetrics(
            precision=float(entry["precision"]),
            recall=float(entry["recall"]),
            f1=float(entry["f1"]),
            support=int(entry["support"]),
            predicted=int(entry.get("predicted", 0)),
        )
    zero_division = {label: 0 for label in CLASS_ORDER}
    for label, count in payload.get("zero_division_counts", {}).items():
        zero_division[VerdictLabel(label)] = int(count)
    return EvaluationReport(
        per_class=per_class,
        macro=Averages(**{k: float(v) for k, v in payload["macro"].items()}),
        weighted=Averages(**{k: float(v) for k, v in payload["weighted"].items()}),
        accuracy=float(payload["accuracy"]),
        n=int(payload["n"]),
        config_fingerprint=str(payload.get("config_fingerprint", "")),
        zero_division_counts=zero_division,
    )


def compute_metrics(
    predictions: Sequence[VerdictLabel],
    gold: Sequence[VerdictLabel],
    config_fingerprint: str = "",
) -> EvaluationReport:
    """Score predictions against gold labels of equal, non-zero length.

    precision_c = TP_c / (TP_c + FP_c), recall_c = TP_c / (TP_c + FN_c),
    f1_c = 2PR / (P + R); every 0/0 resolves to 0 and increments the class's
    zero-division counter. Macro averages are unweighted means over the
    three classes; weighted averages weight by gold support. Accuracy equals
    weighted recall (the micro identity).
    """
    if len(predictions) != len(gold):
        raise ValueError(
            f"{len(predictions)} predictions against {len(gold)} gold labels"
        )
    if not gold:
        raise ValueError("cannot evaluate an empty instance set")
    tp = {label: 0 for label in CLASS_ORDER}
    fp = {label: 0 for label in CLASS_ORDER}
    fn = {label: 0 for label in CLASS_ORDER}
    support = {label: 0 for label in CLASS_ORDER}
    correct = 0
    for predicted, actual in zip(predictions, gold):
        support[actual] += 1
        if predicted is actual:
            tp[actual] += 1
            correct += 1
        else:
            fp[predicted] += 1
            fn[actual] += 1

    zero_division = {label: 0 for label in CLASS_ORDER}

    def _ratio(numerator: int, denominator: int, label: VerdictLabel) -> float:
        if denominator == 0:
            zero_division[label] += 1
            return 0.0
        return numerator / denominator

    per_class: dict[VerdictLabel, ClassMetrics] = {}
    for label in CLASS_ORDER:
        precision = _ratio(tp[label], tp[label] + fp[label], label)
        recall = _ratio(tp[label], tp[label] + fn[label], label)
        if precision + recall == 0.0:
            zero_division[label] += 1
            f1 = 0.0
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        per_class[label] = ClassMetrics(
            precision=precision,
            recall=recall,
            f1=f1,
            support=support[label],
            predicted=tp[label] + fp[label],
        )

    k = len(CLASS_ORDER)
    macro = Averages(
        precision=sum(m.precision for m in per_class.values()) / k,
        recall=sum(m.recall for m in per_class.values()) / k,
        f1=sum(m.f1 for m in per_class.values()) / k,
    )
    n = len(gold)
    weighted = Averages(
        precision=sum(m.precision * m.support for m in per_class.values()) / n,
        recall=sum(m.recall * m.support for m in per_class.values()) / n,
        f1=sum(m.f1 * m.support for m in per_class.values()) / n,
    )
    return EvaluationReport(
        per_class=per_class,
        macro=macro,
        weighted=weighted,
        accuracy=correct / n,
        n=n,
        config_fingerprint=config_fingerprint,
        zero_division_counts=zero_division,
    )


def aggregate_claim(
    verdicts: Sequence[RawVerdict],
    threshold: float,
    method: AggregationMethod,
    weights: Sequence[float] | None = None,
):
    """Recalibrate a claim's raw verdicts at threshold and aggregate them."""
    calibrated = [recalibrate(v, threshold) for v in verdicts]
    if method is AggregationMethod.MAJORITY:
        return aggregate_majority(calibrated)
    return aggregate_weighted(calibrated, list(weights) if weights is not None else None)


def sweep_thresholds(
    verdicts_by_claim: Mapping[str, Sequence[RawVerdict]],
    gold_by_claim: Mapping[str, VerdictLabel],
    thresholds: Sequence[float],
    method: AggregationMethod = AggregationMethod.MAJORITY,
    weights_by_claim: Mapping[str, Sequence[float]] | None = None,
    config_fingerprint: str = "",
) -> list[tuple[float, EvaluationReport]]:
    """Evaluate every threshold against cached raw verdicts.

    Pure recomputation: recalibration and aggregation consume the stored
    probability vectors, so a sweep over k thresholds costs zero classifier
    calls beyond the pass that produced the verdicts. Reports come back
    ordered by threshold.
    """
    if not thresholds:
        raise ValueError("sweep needs at least one threshold")
    missing = sorted(set(verdicts_by_claim) - set(gold_by_claim))
    if missing:
        raise ValueError(f"claims lack gold labels: {missing[:5]}")
    claim_ids = sorted(verdicts_by_claim)
    if not claim_ids:
        raise ValueError("sweep needs at least one claim")
    results: list[tuple[float, EvaluationReport]] = []
    for threshold in sorted(set(float(t) for t in thresholds)):
        predictions: list[VerdictLabel] = []
        gold: list[VerdictLabel] = []
        for claim_id in claim_ids:
            weights = weights_by_claim.get(claim_id) if weights_by_claim else None
            final = aggregate_claim(
                verdicts_by_claim[claim_id], threshold, method, weights
            )
            predictions.append(final.label)
            gold.append(gold_by_claim[claim_id])
        results.append(
            (threshold, compute_metrics(predictions, gold, config_fingerprint))
        )
    return results


# ---------------------------------------------------------------------------
# Rendering

_SUMMARY_METRICS = (
    "accuracy",
    "macro_precision",
    "macro_recall",
    "macro_f1",
    "weighted_precision",
    "weighted_recall",
    "weighted_f1",
)


def _summary_values(report: EvaluationReport) -> dict[str, float]:
    return {
        "accuracy": report.accuracy,
        "macro_precision": report.macro.precision,
        "macro_recall": report.macro.recall,
        "macro_f1": report.macro.f1,
        "weighted_precision": report.weighted.precision,
        "weighted_recall": report.weighted.recall,
        "weighted_f1": report.weighted.f1,
    }


def render_report(report: EvaluationReport, fmt: str) -> str:
    """Render one report as json (full precision), csv, or md (both rounded
    to two decimals for human eyes)."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["class", "precision", "recall", "f1", "support"])
        for label in CLASS_ORDER:
            m = report.per_class[label]
            writer.writerow(
                [label.value, f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}", m.support]
            )
        writer.writerow(
            ["macro", f"{report.macro.precision:.2f}", f"{report.macro.recall:.2f}",
             f"{report.macro.f1:.2f}", report.n]
        )
        writer.writerow(
            ["weighted", f"{report.weighted.precision:.2f}", f"{report.weighted.recall:.2f}",
             f"{report.weighted.f1:.2f}", report.n]
        )
        writer.writerow(["accuracy", "", "", f"{report.accuracy:.2f}", report.n])
        return buffer.getvalue()
    if fmt == "md":
        lines = [
            "| class | precision | recall | f1 | support |",
            "| --- | --- | --- | --- | --- |",
        ]
        for label in CLASS_ORDER:
            m = report.per_class[label]
            lines.append(
                f"| {label.value} | {m.precision:.2f} | {m.recall:.2f} "
                f"| {m.f1:.2f} | {m.support} |"
            )
        lines.append(
            f"| macro | {report.macro.precision:.2f} | {report.macro.recall:.2f} "
            f"| {report.macro.f1:.2f} | {report.n} |"
        )
        lines.append(
            f"| weighted | {report.weighted.precision:.2f} | {report.weighted.recall:.2f} "
            f"| {report.weighted.f1:.2f} | {report.n} |"
        )
        lines.append(f"| accuracy |  |  | {report.accuracy:.2f} | {report.n} |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r} (expected json, csv, or md)")


def compare_runs(named_reports: Sequence[tuple[str, EvaluationReport]]) -> dict:
    """Side-by-side comparison; deltas are against the first (baseline) run."""
    if len(named_reports) < 2:
        raise ValueError("comparison needs at least two reports")
    names = [name for name, _ in named_reports]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate run names: {names}")
    baseline_name, baseline = named_reports[0]
    rows = []
    for metric in _SUMMARY_METRICS:
        base_value = _summary_values(baseline)[metric]
        row = {"metric": metric, baseline_name: base_value}
        for name, report in named_reports[1:]:
            value = _summary_values(report)[metric]
            row[name] = value
            row[f"{name}_delta"] = value - base_value
        rows.append(row)
    return {"baseline": baseline_name, "runs": names, "rows": rows}


def render_comparison(comparison: dict, fmt: str) -> str:
    runs: list[str] = comparison["runs"]
    baseline = comparison["baseline"]
    if fmt == "json":
        return json.dumps(comparison, indent=2, sort_keys=True) + "\n"
    header = ["metric", baseline]
    for name in runs[1:]:
        header.extend([name, f"{name}_delta"])
    table_rows: list[list[str]] = []
    for row in comparison["rows"]:
        cells = [row["metric"], f"{row[baseline]:.2f}"]
        for name in runs[1:]:
            cells.extend([f"{row[name]:.2f}", f"{row[f'{name}_delta']:+.2f}"])
        table_rows.append(cells)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(table_rows)
        return buffer.getvalue()
    if fmt == "md":
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        for cells in table_rows:
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r} (expected json, csv, or md)")
