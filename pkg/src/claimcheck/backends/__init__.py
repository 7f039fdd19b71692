"""Model backends: interfaces, deterministic stubs, cache, local, remote."""

from .base import (
    TRUNCATION_POLICY_VERSION,
    ClassifierOutput,
    NLIClassifier,
    SpanExtractor,
    SpanResult,
    TextEmbedder,
    truncate_evidence,
)
from .cache import CachingClassifier, VerdictCache, cache_key
from .stub import StubEmbedder, StubNLIClassifier, StubSpanExtractor

__all__ = [
    "TRUNCATION_POLICY_VERSION",
    "ClassifierOutput",
    "NLIClassifier",
    "SpanExtractor",
    "SpanResult",
    "TextEmbedder",
    "truncate_evidence",
    "CachingClassifier",
    "VerdictCache",
    "cache_key",
    "StubEmbedder",
    "StubNLIClassifier",
    "StubSpanExtractor",
]
