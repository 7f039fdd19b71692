"""Local transformer-model backends.

transformers and torch are imported lazily so stub-only environments never
pay for them; install the package with the `models` extra to use these.
The classifier discovers the checkpoint's label order from its config
instead of assuming one, because public MNLI checkpoints disagree on it.
"""

from __future__ import annotations

import logging

import numpy as np

from ..core import BackendError, ProbabilityVector
from .base import NLIClassifier, SpanExtractor, SpanResult, TextEmbedder

logger = logging.getLogger(__name__)

DEFAULT_NLI_MODEL = "microsoft/deberta-large-mnli"
DEFAULT_EXTRACTOR_MODEL = "deepset/roberta-base-squad2-distilled"
DEFAULT_EMBEDDER_MODEL = "sentence-transformers/all-MiniLM-L6-v2"

# Checkpoint label names that map onto each entailment class.
_LABEL_SYNONYMS = {
    "entailment": 0,
    "contradiction": 1,
    "neutral": 2,
}


def _require_torch():
    try:
        import torch  # noqa: F401

        return torch
    except ImportError as exc:  # pragma: no cover - environment dependent
        raise BackendError(
            "the local-model backend needs the 'models' extra "
            "(pip install claimcheck[models])"
        ) from exc


def resolve_label_positions(id2label: dict[int, str]) -> tuple[int, int, int]:
    """Map a checkpoint's id2label onto (entailment, contradiction, neutral)
    positions. Raises BackendError when the names are not recognizable."""
    positions: dict[int, int] = {}
    for idx, name in id2label.items():
        key = str(name).strip().lower()
        if key in _LABEL_SYNONYMS:
            positions[_LABEL_SYNONYMS[key]] = int(idx)
    if sorted(positions) != [0, 1, 2]:
        raise BackendError(
            f"cannot map checkpoint labels {id2label!r} onto "
            "entailment/contradiction/neutral"
        )
    return positions[0], positions[1], positions[2]


class LocalNLIClassifier(NLIClassifier):
    """Sequence-classification checkpoint over (premise, hypothesis)."""

    declared_max_in_flight = 1  # a single local model is not re-entrant

    def __init__(
        self,
        model_id: str = DEFAULT_NLI_MODEL,
        max_length: int = 512,
        device: str = "cpu",
    ) -> None:
        super().__init__(model_id=model_id, max_length=max_length)
        torch = _require_torch()
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_id)
        self._model = AutoModelForSequenceClassification.from_pretrained(model_id)
        self._model.to(device)
        self._model.eval()
        self._device = device
        self._positions = resolve_label_positions(self._model.config.id2label)
        sep = self._tokenizer.sep_token
        self.separator = sep if sep else "[SEP]"

    def _classify(
        self, premise: str, hypothesis: str, joined: str | None
    ) -> ProbabilityVector:
        torch = self._torch
        # only_first truncates the premise (evidence); the claim survives.
        encoded = self._tokenizer(
            premise,
            hypothesis,
            truncation="only_first",
            max_length=min(self.max_length, self._tokenizer.model_max_length),
            return_tensors="pt",
        ).to(self._device)
        with torch.no_grad():
            logits = self._model(**encoded).logits[0].double()
            probs = torch.softmax(logits, dim=-1).cpu().numpy()
        e, c, n = self._positions
        values = [float(probs[e]), float(probs[c]), float(probs[n])]
        drift = sum(values) - 1.0
        # float64 softmax sums to 1 within ~1e-15; absorb that dust only.
        values[2] = max(0.0, values[2] - drift)
        return ProbabilityVector(*values)


class LocalSpanExtractor(SpanExtractor):
    """Extractive-QA checkpoint; the claim is the question."""

    def __init__(self, model_id: str = DEFAULT_EXTRACTOR_MODEL, device: str = "cpu") -> None:
        super().__init__(model_id=model_id)
        _require_torch()
        from transformers import pipeline

        device_index = -1 if device == "cpu" else 0
        self._pipeline = pipeline(
            "question-answering", model=model_id, tokenizer=model_id, device=device_index
        )

    def extract(self, question: str, context: str) -> SpanResult:
        result = self._pipeline(question=question, context=context)
        answer = result.get("answer", "") or ""
        start = int(result.get("start", 0))
        end = int(result.get("end", 0))
        if context[start:end] != answer:
            # Offsets are part of the contract; repair via search or give up.
            located = context.find(answer) if answer else -1
            if located < 0:
                return SpanResult(text="", start=0, end=0, score=0.0)
            start, end = located, located + len(answer)
        return SpanResult(
            text=answer, start=start, end=end, score=float(result.get("score", 0.0))
        )


class LocalEmbedder(TextEmbedder):
    """Mean-pooled transformer sentence embeddings."""

    def __init__(self, model_id: str = DEFAULT_EMBEDDER_MODEL, device: str = "cpu") -> None:
        torch = _require_torch()
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_id)
        self._model = AutoModel.from_pretrained(model_id)
        self._model.to(device)
        self._model.eval()
        self._device = device
        super().__init__(model_id=model_id, dimension=int(self._model.config.hidden_size))

    def embed(self, text: str) -> np.ndarray:
        torch = self._torch
        encoded = self._tokenizer(
            text, truncation=True, max_length=512, return_tensors="pt"
        ).to(self._device)
        with torch.no_grad():
            hidden = self._model(**encoded).last_hidden_state[0]
            mask = encoded["attention_mask"][0].unsqueeze(-1)
            pooled = (hidden * mask).sum(dim=0) / mask.sum().clamp(min=1)
        return pooled.cpu().numpy().astype(float)
