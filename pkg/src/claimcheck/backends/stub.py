"""Deterministic stub backends.

The stub classifier derives a probability vector from a keyed hash of the
input pair, so results are stable across processes and machines at a fixed
seed, and every property suite and end-to-end fixture runs with zero model
downloads. An override table pins exact outputs for fixture cases.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from ..core import ProbabilityVector
from .base import NLIClassifier, SpanExtractor, SpanResult, TextEmbedder

_FIELD_SEP = b"\x1f"


def _keyed_digest(seed: int, *parts: str) -> bytes:
    h = hashlib.blake2b(digest_size=32)
    h.update(str(seed).encode("utf-8"))
    for part in parts:
        h.update(_FIELD_SEP)
        h.update(part.encode("utf-8"))
    return h.digest()


def _digest_floats(digest: bytes, count: int) -> list[float]:
    """Map digest bytes to floats in [0, 1), 8 bytes per float."""
    if count * 8 > len(digest):
        raise ValueError("digest too short")
    return [
        int.from_bytes(digest[i * 8 : (i + 1) * 8], "big") / 2**64
        for i in range(count)
    ]


def stub_probability_vector(seed: int, premise: str, hypothesis: str) -> ProbabilityVector:
    """Seed-stable pseudo-random distribution for a pair.

    Three exponential draws normalized to the simplex (a flat Dirichlet
    sample), so confidences cover the full [1/3, 1) range.
    """
    digest = _keyed_digest(seed, "nli", premise, hypothesis)
    draws = [-math.log1p(-u) for u in _digest_floats(digest, 3)]
    total = sum(draws)
    if total == 0.0:
        return ProbabilityVector.uniform()
    scaled = [d / total for d in draws]
    # Absorb float drift into the last component so the sum is exactly 1.
    residual = max(0.0, 1.0 - scaled[0] - scaled[1])
    return ProbabilityVector(scaled[0], scaled[1], residual)


class StubNLIClassifier(NLIClassifier):
    """Hash-driven classifier. overrides maps (premise, hypothesis), as
    passed post-truncation, to fixed ProbabilityVectors for fixtures."""

    separator = "[SEP]"
    declared_max_in_flight = 64

    def __init__(
        self,
        seed: int = 0,
        overrides: dict[tuple[str, str], ProbabilityVector] | None = None,
        max_length: int = 4096,
    ) -> None:
        super().__init__(model_id=f"stub-nli/seed={seed}", max_length=max_length)
        self.seed = seed
        self.overrides = dict(overrides or {})

    def _classify(
        self, premise: str, hypothesis: str, joined: str | None
    ) -> ProbabilityVector:
        key = (premise, hypothesis)
        if key in self.overrides:
            return self.overrides[key]
        return stub_probability_vector(self.seed, premise, hypothesis)


class StubSpanExtractor(SpanExtractor):
    """Lexical-overlap span picker.

    Scores every window of up to window_tokens whitespace tokens by overlap
    with the question's token set and returns the earliest best window with
    character offsets. Zero overlap yields an empty span (score 0.0), which
    callers treat as no answer. overrides maps (question, context) to fixed
    SpanResults for fixture cases.
    """

    def __init__(
        self,
        model_id: str = "stub-extractor",
        window_tokens: int = 6,
        overrides: dict[tuple[str, str], SpanResult] | None = None,
    ) -> None:
        super().__init__(model_id=model_id)
        if window_tokens <= 0:
            raise ValueError("window_tokens must be positive")
        self.window_tokens = window_tokens
        self.overrides = dict(overrides or {})

    def extract(self, question: str, context: str) -> SpanResult:
        key = (question, context)
        if key in self.overrides:
            return self.overrides[key]
        question_tokens = {t.strip(".,;:!?\"'()").lower() for t in question.split()}
        question_tokens.discard("")
        tokens: list[tuple[str, int, int]] = []
        offset = 0
        for token in context.split():
            start = context.index(token, offset)
            tokens.append((token, start, start + len(token)))
            offset = start + len(token)
        best_score = 0
        best_span: tuple[int, int] | None = None
        for i in range(len(tokens)):
            for j in range(i + 1, min(i + self.window_tokens, len(tokens)) + 1):
                window = tokens[i:j]
                overlap = {
                    t.strip(".,;:!?\"'()").lower() for t, _, _ in window
                } & question_tokens
                if len(overlap) > best_score:
                    best_score = len(overlap)
                    best_span = (window[0][1], window[-1][2])
        if best_span is None:
            return SpanResult(text="", start=0, end=0, score=0.0)
        start, end = best_span
        return SpanResult(
            text=context[start:end],
            start=start,
            end=end,
            score=best_score / len(question_tokens),
        )


class StubEmbedder(TextEmbedder):
    """Hash-derived unit vectors; identical text always embeds identically.
    overrides maps exact texts to fixed vectors for hand-computed fixtures."""

    def __init__(
        self,
        seed: int = 0,
        dimension: int = 16,
        overrides: dict[str, np.ndarray] | None = None,
    ) -> None:
        super().__init__(model_id=f"stub-embedder/seed={seed}", dimension=dimension)
        self.seed = seed
        self.overrides = {k: np.asarray(v, dtype=float) for k, v in (overrides or {}).items()}

    def embed(self, text: str) -> np.ndarray:
        if text in self.overrides:
            return self.overrides[text]
        values: list[float] = []
        counter = 0
        while len(values) < self.dimension:
            digest = _keyed_digest(self.seed, "embed", text, str(counter))
            values.extend(u - 0.5 for u in _digest_floats(digest, 4))
            counter += 1
        vector = np.asarray(values[: self.dimension], dtype=float)
        norm = np.linalg.norm(vector)
        if norm == 0.0:
            vector = np.zeros(self.dimension)
            vector[0] = 1.0
            return vector
        return vector / norm
