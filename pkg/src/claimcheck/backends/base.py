"""Backend interfaces: entailment classifier, span extractor, text embedder.

Every classifier applies the shared truncation policy before inference: the
evidence (premise) is clipped from the right to the backend's length budget,
the claim (hypothesis) is never clipped, and the truncation is flagged on
the output. The policy version participates in cache keys, so changing the
policy invalidates cached verdicts instead of silently mixing regimes.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from ..core import ProbabilityVector

# Whitespace-token budget, evidence clipped from the right, claim preserved.
TRUNCATION_POLICY_VERSION = "ws-right-v1"


def truncate_evidence(
    premise: str, hypothesis: str, max_length: int
) -> tuple[str, bool]:
    """Clip the premise so that premise + hypothesis fits max_length
    whitespace tokens. The premise always keeps at least one token; the
    hypothesis is never touched. Returns (premise, truncated)."""
    premise_tokens = premise.split()
    hypothesis_tokens = hypothesis.split()
    budget = max_length - len(hypothesis_tokens)
    if len(premise_tokens) <= budget:
        return premise, False
    keep = max(budget, 1)
    return " ".join(premise_tokens[:keep]), True


@dataclass(frozen=True)
class ClassifierOutput:
    """One classification result: the probability vector over verdict
    classes plus whether the evidence was truncated to fit the budget."""

    probs: ProbabilityVector
    truncated: bool


class NLIClassifier(ABC):
    """Entailment classifier over (premise = evidence, hypothesis = claim).

    classify() is deterministic per (premise, hypothesis) at a fixed
    model_id, and every real inference increments the call counter, which
    is how cache-economy invariants are asserted.
    """

    #: separator token used when the pair is rendered as one joined string.
    separator: str = "[SEP]"
    #: largest number of claims the pipeline may process concurrently
    #: against this backend.
    declared_max_in_flight: int = 8

    def __init__(self, model_id: str, max_length: int) -> None:
        if max_length <= 0:
            raise ValueError("max_length must be positive")
        self.model_id = model_id
        self.max_length = max_length
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        """Number of real inference invocations performed so far."""
        return self._calls

    def classify(
        self, premise: str, hypothesis: str, joined: str | None = None
    ) -> ClassifierOutput:
        """Classify one pair. Applies the truncation policy, counts the
        call, delegates to the concrete backend, and validates its output.

        Both texts must be non-empty; the optional joined form carries the
        single-string rendering for backends that consume it directly.
        """
        if not premise.strip() or not hypothesis.strip():
            raise ValueError("classify requires non-empty premise and hypothesis")
        premise, truncated = truncate_evidence(premise, hypothesis, self.max_length)
        with self._lock:
            self._calls += 1
        probs = self._classify(premise, hypothesis, joined)
        # ProbabilityVector validates range and sum; constructing it from the
        # backend's raw output is the malformed-output gate.
        return ClassifierOutput(probs=probs, truncated=truncated)

    def classify_many(
        self, pairs: list[tuple[str, str]], batch_size: int = 8
    ) -> list[ClassifierOutput]:
        """Batched classification. Batching is a throughput detail only:
        results are identical to per-pair classify() calls in order."""
        if batch_size <= 0:
            raise ValueError("batch_size must be positive")
        return [self.classify(premise, hypothesis) for premise, hypothesis in pairs]

    @abstractmethod
    def _classify(
        self, premise: str, hypothesis: str, joined: str | None
    ) -> ProbabilityVector:
        """Concrete backend inference on the (already truncated) pair."""


@dataclass(frozen=True)
class SpanResult:
    """Extracted answer span with character offsets into the context."""

    text: str
    start: int
    end: int
    score: float


class SpanExtractor(ABC):
    """Extractive QA interface: locate the context span most relevant to
    the claim. An empty span or a score below the floor means the extractor
    found nothing usable and callers fall back to the full passage."""

    #: extractor confidence below this floor is treated as no answer.
    score_floor: float = 0.0

    def __init__(self, model_id: str) -> None:
        self.model_id = model_id

    @abstractmethod
    def extract(self, question: str, context: str) -> SpanResult:
        """Return the best span; SpanResult.text == context[start:end]."""


class TextEmbedder(ABC):
    """Sentence embedding interface used for attribution scoring."""

    def __init__(self, model_id: str, dimension: int) -> None:
        if dimension <= 0:
            raise ValueError("embedding dimension must be positive")
        self.model_id = model_id
        self.dimension = dimension

    @abstractmethod
    def embed(self, text: str) -> np.ndarray:
        """Return a 1-D float vector of length self.dimension."""
