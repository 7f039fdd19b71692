"""Combine per-evidence verdicts into one claim-level verdict.

Majority voting counts post-calibration labels; ties resolve to
NOT_ENOUGH_INFO (the conservative choice, never invented support).
Weighted averaging takes a weighted mean of the effective probability
vectors; a downgraded verdict therefore contributes the one-hot
NOT_ENOUGH_INFO vector, not its original distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .calibration import CalibratedVerdict
from .core import CLASS_ORDER, VerdictLabel


class AggregationMethod(str, Enum):
    MAJORITY = "majority"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class FinalVerdict:
    claim_id: str
    label: VerdictLabel
    confidence: float
    method: AggregationMethod
    inputs: tuple[CalibratedVerdict, ...]

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("a final verdict needs at least one input verdict")
        if any(v.raw.claim_id != self.claim_id for v in self.inputs):
            raise ValueError("all input verdicts must belong to the same claim")


def _check_inputs(verdicts: list[CalibratedVerdict]) -> str:
    if not verdicts:
        raise ValueError("cannot aggregate zero verdicts")
    claim_ids = {v.raw.claim_id for v in verdicts}
    if len(claim_ids) != 1:
        raise ValueError(f"verdicts span multiple claims: {sorted(claim_ids)}")
    return claim_ids.pop()


def aggregate_majority(verdicts: list[CalibratedVerdict]) -> FinalVerdict:
    """Most frequent label wins; any tie for the top count resolves to
    NOT_ENOUGH_INFO. Confidence is the mean confidence of the verdicts that
    carry the winning label; when a tie forces NOT_ENOUGH_INFO and no input
    carries it, confidence floors at 1/3 (the no-information maximum)."""
    claim_id = _check_inputs(verdicts)
    counts = {label: 0 for label in CLASS_ORDER}
    for verdict in verdicts:
        counts[verdict.label] += 1
    top = max(counts.values())
    winners = [label for label in CLASS_ORDER if counts[label] == top]
    label = winners[0] if len(winners) == 1 else VerdictLabel.NOT_ENOUGH_INFO
    carriers = [v.confidence for v in verdicts if v.label is label]
    if carriers:
        confidence = sum(carriers) / len(carriers)
    else:
        # Tie resolved to NOT_ENOUGH_INFO with zero NEI votes present.
        confidence = 1.0 / len(CLASS_ORDER)
    return FinalVerdict(
        claim_id=claim_id,
        label=label,
        confidence=confidence,
        method=AggregationMethod.MAJORITY,
        inputs=tuple(verdicts),
    )


def aggregate_weighted(
    verdicts: list[CalibratedVerdict], weights: list[float] | None = None
) -> FinalVerdict:
    """Weighted mean of the effective probability vectors.

    Weights are normalized to sum to 1 (None means uniform), so scaling all
    weights by a positive constant changes nothing. The label is the argmax
    of the mean vector under the declared class order, except that an exact
    SUPPORTED/REFUTED tie at the top resolves to NOT_ENOUGH_INFO.
    """
    claim_id = _check_inputs(verdicts)
    if weights is None:
        weights = [1.0] * len(verdicts)
    if len(weights) != len(verdicts):
        raise ValueError(
            f"{len(weights)} weights for {len(verdicts)} verdicts"
        )
    if any(w != w or w < 0.0 for w in weights):
        raise ValueError(f"weights must be non-negative numbers: {weights!r}")
    total = sum(weights)
    if total == 0.0:
        raise ValueError("weights sum to zero")
    normalized = [w / total for w in weights]
    mean = [0.0, 0.0, 0.0]
    for weight, verdict in zip(normalized, verdicts):
        for i, p in enumerate(verdict.effective_probs().as_tuple()):
            mean[i] += weight * p
    top = max(mean)
    winners = {label for label, value in zip(CLASS_ORDER, mean) if value == top}
    if VerdictLabel.SUPPORTED in winners and VerdictLabel.REFUTED in winners:
        label = VerdictLabel.NOT_ENOUGH_INFO
    else:
        label = next(l for l in CLASS_ORDER if l in winners)
    confidence = mean[CLASS_ORDER.index(label)]
    return FinalVerdict(
        claim_id=claim_id,
        label=label,
        confidence=confidence,
        method=AggregationMethod.WEIGHTED,
        inputs=tuple(verdicts),
    )
