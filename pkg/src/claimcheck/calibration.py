"""Confidence recalibration.

A verdict keeps its label only when its confidence clears the threshold;
anything below is downgraded to NOT_ENOUGH_INFO. The boundary case
(confidence exactly equal to the threshold) keeps the label, and threshold
0.0 is the identity, which is how the uncalibrated baseline is expressed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ProbabilityVector, VerdictLabel
from .verification import RawVerdict


def validate_threshold(threshold: float) -> float:
    if not isinstance(threshold, (int, float)) or threshold != threshold:
        raise ValueError(f"threshold must be a number, got {threshold!r}")
    if threshold < 0.0 or threshold > 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold!r}")
    return float(threshold)


@dataclass(frozen=True)
class CalibratedVerdict:
    """A raw verdict after thresholding.

    downgraded is true exactly when raw.confidence fell below threshold and
    the label was therefore forced to NOT_ENOUGH_INFO (even when the raw
    label already was NOT_ENOUGH_INFO).
    """

    raw: RawVerdict
    threshold: float
    label: VerdictLabel
    downgraded: bool

    def __post_init__(self) -> None:
        validate_threshold(self.threshold)
        if self.downgraded:
            if self.label is not VerdictLabel.NOT_ENOUGH_INFO:
                raise ValueError("a downgraded verdict must carry NOT_ENOUGH_INFO")
            if self.raw.confidence >= self.threshold:
                raise ValueError("confidence at or above threshold cannot downgrade")
        else:
            if self.label is not self.raw.label:
                raise ValueError("a kept verdict must carry the raw label")
            if self.raw.confidence < self.threshold:
                raise ValueError("confidence below threshold must downgrade")

    def effective_probs(self) -> ProbabilityVector:
        """The distribution this verdict contributes downstream: the raw
        vector when kept, the one-hot NOT_ENOUGH_INFO vector when downgraded."""
        if self.downgraded:
            return ProbabilityVector.one_hot(VerdictLabel.NOT_ENOUGH_INFO)
        return self.raw.probs

    @property
    def confidence(self) -> float:
        return self.effective_probs().max_prob()

    def as_raw(self) -> RawVerdict:
        """Re-expressible as a raw verdict over the effective distribution,
        which makes recalibration idempotent at any threshold."""
        if not self.downgraded:
            return self.raw
        return RawVerdict.from_probs(
            claim_id=self.raw.claim_id,
            evidence_id=self.raw.evidence_id,
            probs=self.effective_probs(),
            truncated=self.raw.truncated,
        )


def recalibrate(raw: RawVerdict, threshold: float) -> CalibratedVerdict:
    """Apply the piecewise rule: keep the label when confidence >= threshold,
    otherwise downgrade to NOT_ENOUGH_INFO."""
    threshold = validate_threshold(threshold)
    keep = raw.confidence >= threshold
    return CalibratedVerdict(
        raw=raw,
        threshold=threshold,
        label=raw.label if keep else VerdictLabel.NOT_ENOUGH_INFO,
        downgraded=not keep,
    )
