"""Evidence attribution: select what text each claim is verified against.

Full mode passes every passage through verbatim. Span mode asks an
extractive-QA backend for the passage span most relevant to the claim and
falls back to the full passage (flagged) when the extractor finds nothing
usable. Optional attribution scores come from embedding cosine similarity
and may later weight aggregation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .backends.base import SpanExtractor, TextEmbedder
from .core import Claim, EvidencePassage


class AttributionMode(str, Enum):
    FULL = "full"
    SPAN = "span"


@dataclass(frozen=True)
class AttributedEvidence:
    """One claim/evidence pairing after attribution.

    span_text is None exactly in full mode (or span fallback); offsets are
    character indices into passage.text with passage.text[start:end] equal
    to span_text. attribution_score defaults to 1.0 (uniform) until an
    embedder scores it.
    """

    claim: Claim
    passage: EvidencePassage
    mode: AttributionMode
    span_text: str | None = None
    span_start: int = 0
    span_end: int = 0
    attribution_score: float = 1.0
    fallback: bool = False

    def __post_init__(self) -> None:
        if self.span_text is not None:
            if not self.span_text:
                raise ValueError("span_text must be non-empty when present")
            if self.passage.text[self.span_start : self.span_end] != self.span_text:
                raise ValueError(
                    f"span offsets [{self.span_start}:{self.span_end}] do not "
                    f"index span_text in passage {self.passage.id!r}"
                )

    @property
    def verification_text(self) -> str:
        """The text the verifier sees: the span when one was extracted,
        otherwise the whole passage."""
        return self.span_text if self.span_text is not None else self.passage.text


def attribute_full(claim: Claim, passages: list[EvidencePassage]) -> list[AttributedEvidence]:
    """Pair the claim with every passage verbatim, preserving order."""
    if not passages:
        raise ValueError(f"claim {claim.id!r} has no evidence passages")
    return [
        AttributedEvidence(claim=claim, passage=passage, mode=AttributionMode.FULL)
        for passage in passages
    ]


def attribute_span(
    claim: Claim, passages: list[EvidencePassage], extractor: SpanExtractor
) -> list[AttributedEvidence]:
    """Extract the most relevant span per passage, using the claim as the
    question. Empty spans and scores below the extractor's floor fall back
    to the full passage with fallback=True."""
    if not passages:
        raise ValueError(f"claim {claim.id!r} has no evidence passages")
    items: list[AttributedEvidence] = []
    for passage in passages:
        result = extractor.extract(claim.text, passage.text)
        if not result.text or result.score < extractor.score_floor:
            items.append(
                AttributedEvidence(
                    claim=claim,
                    passage=passage,
                    mode=AttributionMode.SPAN,
                    fallback=True,
                )
            )
            continue
        items.append(
            AttributedEvidence(
                claim=claim,
                passage=passage,
                mode=AttributionMode.SPAN,
                span_text=result.text,
                span_start=result.start,
                span_end=result.end,
            )
        )
    return items


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; zero vectors score 0.0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    value = float(np.dot(a, b)) / norm
    return max(-1.0, min(1.0, value))


def score_attribution(item: AttributedEvidence, embedder: TextEmbedder) -> AttributedEvidence:
    """Attach the claim/verification-text cosine similarity as the score."""
    claim_vec = embedder.embed(item.claim.text)
    evidence_vec = embedder.embed(item.verification_text)
    return replace(item, attribution_score=cosine_similarity(claim_vec, evidence_vec))
