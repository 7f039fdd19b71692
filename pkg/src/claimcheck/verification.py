"""Entailment verification of one claim/evidence pairing."""

from __future__ import annotations

from dataclasses import dataclass

from .attribution import AttributedEvidence
from .backends.base import NLIClassifier
from .core import ProbabilityVector, VerdictLabel


@dataclass(frozen=True)
class RawVerdict:
    """Uncalibrated verdict for one (claim, evidence) pair.

    label is the argmax of probs (ties to the first class in order) and
    confidence is its max component; both are enforced at construction.
    """

    claim_id: str
    evidence_id: str
    label: VerdictLabel
    confidence: float
    probs: ProbabilityVector
    truncated: bool = False

    def __post_init__(self) -> None:
        if self.label is not self.probs.argmax_label():
            raise ValueError(
                f"label {self.label.value} is not the argmax of {self.probs!r}"
            )
        if self.confidence != self.probs.max_prob():
            raise ValueError(
                f"confidence {self.confidence!r} is not max({self.probs!r})"
            )

    @staticmethod
    def from_probs(
        claim_id: str, evidence_id: str, probs: ProbabilityVector, truncated: bool = False
    ) -> "RawVerdict":
        return RawVerdict(
            claim_id=claim_id,
            evidence_id=evidence_id,
            label=probs.argmax_label(),
            confidence=probs.max_prob(),
            probs=probs,
            truncated=truncated,
        )


def format_input(item: AttributedEvidence, separator: str) -> str:
    """Render the pair as one string: claim text, the backend's separator
    token, then the verification text, joined by single spaces. An empty
    separator degenerates to claim followed by evidence."""
    parts = [item.claim.text, separator, item.verification_text]
    return " ".join(part for part in parts if part)


def verify_pair(item: AttributedEvidence, classifier: NLIClassifier) -> RawVerdict:
    """Classify one pairing.

    The backend receives the structured pair (premise = verification text,
    hypothesis = claim text) plus the joined single-string form, and decides
    which it consumes. Deterministic for a fixed backend: verifying the same
    pairing twice yields equal verdicts.
    """
    joined = format_input(item, classifier.separator)
    output = classifier.classify(
        premise=item.verification_text,
        hypothesis=item.claim.text,
        joined=joined,
    )
    return RawVerdict.from_probs(
        claim_id=item.claim.id,
        evidence_id=item.passage.id,
        probs=output.probs,
        truncated=output.truncated,
    )
