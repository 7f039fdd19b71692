"""Core label algebra and domain types shared by every pipeline stage."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

PACKAGE_VERSION = "0.1.0"

# Tolerance for "components sum to 1" on probability vectors. Anything
# further off than this is a malformed backend output and must not be
# silently renormalized.
PROB_SUM_TOLERANCE = 1e-6


class ClaimcheckError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ClaimcheckError):
    """Invalid configuration (bad flag value, missing required setting)."""


class DatasetError(ClaimcheckError):
    """Dataset-level failure (unreadable file, unusable schema)."""


class BackendError(ClaimcheckError):
    """Model backend failure."""

    retryable = False


class BackendUnavailableError(BackendError):
    """Transient backend failure (endpoint unreachable); safe to retry."""

    retryable = True


class MalformedBackendOutputError(BackendError):
    """Backend returned output violating its contract; never retried."""


class VerdictLabel(str, Enum):
    """Final verdict vocabulary for a claim."""

    SUPPORTED = "SUPPORTED"
    REFUTED = "REFUTED"
    NOT_ENOUGH_INFO = "NOT_ENOUGH_INFO"


class NLILabel(str, Enum):
    """Entailment-model output vocabulary."""

    ENTAILMENT = "ENTAILMENT"
    CONTRADICTION = "CONTRADICTION"
    NEUTRAL = "NEUTRAL"


# Fixed class order: used for report rows, argmax tie-breaking (first
# listed wins) and the component order of ProbabilityVector.
CLASS_ORDER: tuple[VerdictLabel, VerdictLabel, VerdictLabel] = (
    VerdictLabel.SUPPORTED,
    VerdictLabel.REFUTED,
    VerdictLabel.NOT_ENOUGH_INFO,
)

_NLI_TO_VERDICT = {
    NLILabel.ENTAILMENT: VerdictLabel.SUPPORTED,
    NLILabel.CONTRADICTION: VerdictLabel.REFUTED,
    NLILabel.NEUTRAL: VerdictLabel.NOT_ENOUGH_INFO,
}
_VERDICT_TO_NLI = {v: k for k, v in _NLI_TO_VERDICT.items()}


def map_nli_to_verdict(label: NLILabel) -> VerdictLabel:
    """Map an entailment label onto the verdict vocabulary (total, bijective)."""
    return _NLI_TO_VERDICT[label]


def map_verdict_to_nli(label: VerdictLabel) -> NLILabel:
    """Inverse of map_nli_to_verdict."""
    return _VERDICT_TO_NLI[label]


class Dataset(str, Enum):
    """Supported input dataset kinds."""

    FEVER = "fever"
    CLIMATE_FEVER = "climate-fever"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ProbabilityVector:
    """Distribution over (SUPPORTED, REFUTED, NOT_ENOUGH_INFO), in that order.

    Components must lie in [0, 1] and sum to 1 within PROB_SUM_TOLERANCE;
    violations raise MalformedBackendOutputError so that bad backend output
    can never travel further down the pipeline.
    """

    p_supported: float
    p_refuted: float
    p_nei: float

    def __post_init__(self) -> None:
        total = 0.0
        for value in self.as_tuple():
            if not isinstance(value, (int, float)) or value != value:
                raise MalformedBackendOutputError(
                    f"non-numeric probability component: {self!r}"
                )
            if value < 0.0 or value > 1.0:
                raise MalformedBackendOutputError(
                    f"probability component outside [0, 1]: {self!r}"
                )
            total += value
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise MalformedBackendOutputError(
                f"probability components sum to {total!r}, not 1: {self!r}"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_supported, self.p_refuted, self.p_nei)

    def for_label(self, label: VerdictLabel) -> float:
        return self.as_tuple()[CLASS_ORDER.index(label)]

    def max_prob(self) -> float:
        return max(self.as_tuple())

    def argmax_label(self) -> VerdictLabel:
        """Most probable label; ties go to the first label in CLASS_ORDER."""
        values = self.as_tuple()
        best = max(values)
        for label, value in zip(CLASS_ORDER, values):
            if value == best:
                return label
        raise AssertionError("unreachable")

    @staticmethod
    def one_hot(label: VerdictLabel) -> "ProbabilityVector":
        values = [0.0, 0.0, 0.0]
        values[CLASS_ORDER.index(label)] = 1.0
        return ProbabilityVector(*values)

    @staticmethod
    def uniform() -> "ProbabilityVector":
        third = 1.0 / 3.0
        return ProbabilityVector(third, third, third)


@dataclass(frozen=True)
class Claim:
    """A single checkable claim.

    id is caller-supplied when the source data carries one, otherwise derived
    via derive_claim_id; it must be unique within a run.
    """

    id: str
    text: str
    gold_label: VerdictLabel | None = None
    dataset: Dataset = Dataset.CUSTOM

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("claim id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"claim {self.id!r} has empty text")


@dataclass(frozen=True)
class EvidencePassage:
    """One evidence passage attached to a claim."""

    id: str
    text: str
    source_doc: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("evidence id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"evidence {self.id!r} has empty text")


def derive_claim_id(dataset: Dataset, text: str, occurrence: int = 0) -> str:
    """Content-hash claim id, stable across runs for identical inputs.

    occurrence disambiguates repeated identical texts within one file so ids
    stay unique within a run.
    """
    digest = hashlib.sha256(
        f"{dataset.value}\x00{text}\x00{occurrence}".encode("utf-8")
    ).hexdigest()
    return digest[:16]
