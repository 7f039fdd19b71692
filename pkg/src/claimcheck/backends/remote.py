"""Remote inference endpoint backends.

Wire format (JSON over HTTP POST):

  POST {base_url}/classify   {"model": ..., "premise": ..., "hypothesis": ...,
                              "joined": ...}
    -> {"probs": [p_entailment, p_contradiction, p_neutral]}
  POST {base_url}/extract    {"model": ..., "question": ..., "context": ...}
    -> {"answer": ..., "start": ..., "end": ..., "score": ...}
  POST {base_url}/embed      {"model": ..., "text": ...}
    -> {"embedding": [...]}

Connection failures and 5xx responses raise BackendUnavailableError
(retryable); contract violations in a 2xx body raise
MalformedBackendOutputError with the offending payload attached, and are
never retried.
"""

from __future__ import annotations

import logging

import httpx
import numpy as np

from ..core import BackendUnavailableError, MalformedBackendOutputError, ProbabilityVector
from .base import NLIClassifier, SpanExtractor, SpanResult, TextEmbedder

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0


class _EndpointClient:
    def __init__(
        self,
        base_url: str,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        if not base_url:
            raise ValueError("endpoint base_url must be non-empty")
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"), timeout=timeout, transport=transport
        )

    def post(self, route: str, payload: dict) -> dict:
        try:
            response = self._client.post(route, json=payload)
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"endpoint unreachable: {exc}") from exc
        if response.status_code >= 500:
            raise BackendUnavailableError(
                f"endpoint error {response.status_code} on {route}"
            )
        if response.status_code != 200:
            raise MalformedBackendOutputError(
                f"endpoint returned {response.status_code} on {route}: "
                f"{response.text[:500]!r}"
            )
        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedBackendOutputError(
                f"endpoint returned non-JSON body on {route}: {response.text[:500]!r}"
            ) from exc
        if not isinstance(body, dict):
            raise MalformedBackendOutputError(
                f"endpoint body is not an object on {route}: {body!r}"
            )
        return body


class RemoteNLIClassifier(NLIClassifier):
    """Classifier served by a remote endpoint."""

    declared_max_in_flight = 8

    def __init__(
        self,
        base_url: str,
        model_id: str,
        max_length: int = 512,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        super().__init__(model_id=model_id, max_length=max_length)
        self._client = _EndpointClient(base_url, timeout=timeout, transport=transport)

    def _classify(
        self, premise: str, hypothesis: str, joined: str | None
    ) -> ProbabilityVector:
        body = self._client.post(
            "/classify",
            {
                "model": self.model_id,
                "premise": premise,
                "hypothesis": hypothesis,
                "joined": joined,
            },
        )
        probs = body.get("probs")
        if not isinstance(probs, list) or len(probs) != 3:
            raise MalformedBackendOutputError(
                f"classify response must carry 3 probabilities, got {body!r}"
            )
        try:
            values = [float(p) for p in probs]
        except (TypeError, ValueError) as exc:
            raise MalformedBackendOutputError(
                f"non-numeric probabilities in {body!r}"
            ) from exc
        # Endpoint order is (entailment, contradiction, neutral), which is
        # positionally aligned with the verdict class order.
        return ProbabilityVector(*values)


class RemoteSpanExtractor(SpanExtractor):
    def __init__(
        self,
        base_url: str,
        model_id: str,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        super().__init__(model_id=model_id)
        self._client = _EndpointClient(base_url, timeout=timeout, transport=transport)

    def extract(self, question: str, context: str) -> SpanResult:
        body = self._client.post(
            "/extract",
            {"model": self.model_id, "question": question, "context": context},
        )
        try:
            answer = str(body["answer"])
            start = int(body["start"])
            end = int(body["end"])
            score = float(body["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedBackendOutputError(
                f"extract response missing fields: {body!r}"
            ) from exc
        if answer and context[start:end] != answer:
            raise MalformedBackendOutputError(
                f"extract offsets do not index the answer: {body!r}"
            )
        return SpanResult(text=answer, start=start, end=end, score=score)


class RemoteEmbedder(TextEmbedder):
    def __init__(
        self,
        base_url: str,
        model_id: str,
        dimension: int,
        timeout: float = DEFAULT_TIMEOUT,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        super().__init__(model_id=model_id, dimension=dimension)
        self._client = _EndpointClient(base_url, timeout=timeout, transport=transport)

    def embed(self, text: str) -> np.ndarray:
        body = self._client.post("/embed", {"model": self.model_id, "text": text})
        embedding = body.get("embedding")
        if not isinstance(embedding, list) or len(embedding) != self.dimension:
            raise MalformedBackendOutputError(
                f"embed response must carry {self.dimension} floats, got {body!r}"
            )
        try:
            return np.asarray([float(x) for x in embedding], dtype=float)
        except (TypeError, ValueError) as exc:
            raise MalformedBackendOutputError(
                f"non-numeric embedding in {body!r}"
            ) from exc
