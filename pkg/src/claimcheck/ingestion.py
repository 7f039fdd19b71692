"""Dataset loading and label normalization.

Input files are line-delimited JSON. Each record carries a claim text, one
or more evidence texts, and a gold label in the dataset's native vocabulary.
Field names differ between public snapshots, so a per-dataset alias table
maps native names onto the canonical claim/evidence/label schema. Malformed
lines never abort a load: they are rejected with their line number and
reason, and accepted + rejected always equals the number of input lines.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .core import (
    Claim,
    Dataset,
    DatasetError,
    EvidencePassage,
    VerdictLabel,
    derive_claim_id,
)

logger = logging.getLogger(__name__)

# Native label vocabularies, matched case-insensitively. Unknown labels are
# rejected naming the offending value; they are never coerced.
_LABEL_VOCAB: dict[Dataset, dict[str, VerdictLabel]] = {
    Dataset.FEVER: {
        "ENTAILMENT": VerdictLabel.SUPPORTED,
        "CONTRADICTION": VerdictLabel.REFUTED,
        "NEUTRAL": VerdictLabel.NOT_ENOUGH_INFO,
    },
    Dataset.CLIMATE_FEVER: {
        "SUPPORTS": VerdictLabel.SUPPORTED,
        "REFUTES": VerdictLabel.REFUTED,
        "NOT_ENOUGH_INFO": VerdictLabel.NOT_ENOUGH_INFO,
    },
}
# Custom data accepts the union of both vocabularies plus the canonical
# verdict names themselves.
_LABEL_VOCAB[Dataset.CUSTOM] = {
    **_LABEL_VOCAB[Dataset.FEVER],
    **_LABEL_VOCAB[Dataset.CLIMATE_FEVER],
    "SUPPORTED": VerdictLabel.SUPPORTED,
    "REFUTED": VerdictLabel.REFUTED,
    "NEI": VerdictLabel.NOT_ENOUGH_INFO,
}

# Field-name aliases per canonical field, tried in order.
_CLAIM_FIELDS = ("claim", "hypothesis", "claim_text")
_EVIDENCE_FIELDS = ("evidence", "evidences", "premise", "evidence_text", "rationale")
_LABEL_FIELDS = ("label", "claim_label", "gold_label")

# Published reference class distributions for the supported dataset
# snapshots, keyed by native label. validate-data compares observed counts
# against these and reports (never hides) any deviation.
REFERENCE_DISTRIBUTIONS: dict[Dataset, dict[str, int]] = {
    Dataset.FEVER: {"ENTAILMENT": 792, "CONTRADICTION": 812, "NEUTRAL": 683},
    Dataset.CLIMATE_FEVER: {"SUPPORTS": 375, "REFUTES": 164, "NOT_ENOUGH_INFO": 996},
}


def normalize_label(raw: str, dataset: Dataset) -> VerdictLabel:
    """Map a native gold label onto the verdict vocabulary.

    Matching is case-insensitive and whitespace-trimmed. Unknown labels
    raise DatasetError naming the offending value.
    """
    key = raw.strip().upper()
    vocab = _LABEL_VOCAB[dataset]
    if key not in vocab:
        raise DatasetError(
            f"unknown label {raw!r} for dataset {dataset.value!r} "
            f"(expected one of {sorted(vocab)})"
        )
    return vocab[key]


@dataclass(frozen=True)
class DatasetRecord:
    """One accepted input record in canonical form."""

    claim_text: str
    evidence_texts: tuple[str, ...]
    label: VerdictLabel
    native_label: str
    line_number: int

    def __post_init__(self) -> None:
        if not self.claim_text.strip():
            raise ValueError("record claim text is empty")
        if not self.evidence_texts:
            raise ValueError("record carries no evidence")


@dataclass(frozen=True)
class RejectedLine:
    line_number: int
    reason: str


@dataclass
class LoadResult:
    """Accepted records plus an account of every rejected line."""

    dataset: Dataset
    path: str
    records: list[DatasetRecord] = field(default_factory=list)
    rejects: list[RejectedLine] = field(default_factory=list)
    total_lines: int = 0

    @property
    def accepted(self) -> int:
        return len(self.records)

    @property
    def rejected(self) -> int:
        return len(self.rejects)

    def __iter__(self) -> Iterator[DatasetRecord]:
        return iter(self.records)

    def class_distribution(self) -> dict[str, int]:
        """Counts keyed by native label, zero-filled for the known vocabulary."""
        counts: dict[str, int] = {}
        for native in _LABEL_VOCAB[self.dataset]:
            counts[native] = 0
        for record in self.records:
            counts[record.native_label] = counts.get(record.native_label, 0) + 1
        return counts

    def verdict_distribution(self) -> dict[VerdictLabel, int]:
        counts = {label: 0 for label in VerdictLabel}
        for record in self.records:
            counts[record.label] += 1
        return counts

    def to_claims(self) -> list[tuple[Claim, list[EvidencePassage]]]:
        """Build pipeline inputs; claim ids are content-derived and unique."""
        seen: dict[str, int] = {}
        out: list[tuple[Claim, list[EvidencePassage]]] = []
        for record in self.records:
            occurrence = seen.get(record.claim_text, 0)
            seen[record.claim_text] = occurrence + 1
            claim_id = derive_claim_id(self.dataset, record.claim_text, occurrence)
            claim = Claim(
                id=claim_id,
                text=record.claim_text,
                gold_label=record.label,
                dataset=self.dataset,
            )
            passages = [
                EvidencePassage(id=f"{claim_id}/e{i}", text=text)
                for i, text in enumerate(record.evidence_texts)
            ]
            out.append((claim, passages))
        return out


def _first_present(obj: dict, names: tuple[str, ...]):
    for name in names:
        if name in obj:
            return obj[name]
    return None


def _extract_evidence_texts(value) -> list[str]:
    """Normalize the evidence field: plain string, list of strings, or list
    of objects carrying their text under 'evidence'/'text'."""
    if isinstance(value, str):
        return [value] if value.strip() else []
    if isinstance(value, list):
        texts: list[str] = []
        for item in value:
            if isinstance(item, str):
                if item.strip():
                    texts.append(item)
            elif isinstance(item, dict):
                inner = item.get("evidence", item.get("text"))
                if isinstance(inner, str) and inner.strip():
                    texts.append(inner)
            else:
                raise ValueError(f"unusable evidence entry of type {type(item).__name__}")
        return texts
    raise ValueError(f"unusable evidence field of type {type(value).__name__}")


def parse_record(obj: dict, dataset: Dataset, line_number: int) -> DatasetRecord:
    """Map one decoded JSON object onto a DatasetRecord or raise ValueError /
    DatasetError with a reason suitable for the reject report."""
    claim_text = _first_present(obj, _CLAIM_FIELDS)
    if not isinstance(claim_text, str) or not claim_text.strip():
        raise ValueError(f"missing claim text (tried fields {list(_CLAIM_FIELDS)})")
    raw_evidence = _first_present(obj, _EVIDENCE_FIELDS)
    if raw_evidence is None:
        raise ValueError(f"missing evidence (tried fields {list(_EVIDENCE_FIELDS)})")
    evidence_texts = _extract_evidence_texts(raw_evidence)
    if not evidence_texts:
        raise ValueError("evidence field present but empty")
    raw_label = _first_present(obj, _LABEL_FIELDS)
    if not isinstance(raw_label, str) or not raw_label.strip():
        raise ValueError(f"missing label (tried fields {list(_LABEL_FIELDS)})")
    label = normalize_label(raw_label, dataset)
    return DatasetRecord(
        claim_text=claim_text.strip(),
        evidence_texts=tuple(t.strip() for t in evidence_texts),
        label=label,
        native_label=raw_label.strip().upper(),
        line_number=line_number,
    )


def load_dataset(path: str | Path, dataset: Dataset) -> LoadResult:
    """Load a line-delimited dataset file.

    Blank lines are ignored entirely; every other line is either accepted or
    recorded in rejects with its 1-based line number and a reason.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")
    result = LoadResult(dataset=dataset, path=str(path))
    with path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            result.total_lines += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                result.rejects.append(RejectedLine(line_number, f"invalid JSON: {exc}"))
                continue
            if not isinstance(obj, dict):
                result.rejects.append(
                    RejectedLine(line_number, "line is not a JSON object")
                )
                continue
            try:
                result.records.append(parse_record(obj, dataset, line_number))
            except (ValueError, DatasetError) as exc:
                result.rejects.append(RejectedLine(line_number, str(exc)))
    if result.rejects:
        logger.warning(
            "%s: rejected %d of %d lines", path, result.rejected, result.total_lines
        )
    return result


@dataclass(frozen=True)
class ValidationReport:
    """validate-data output: observed counts against the published reference."""

    dataset: Dataset
    path: str
    total_lines: int
    accepted: int
    rejected: int
    distribution: dict[str, int]
    reference: dict[str, int] | None
    deviations: dict[str, tuple[int, int]]  # label -> (observed, expected)

    @property
    def matches_reference(self) -> bool:
        return self.reference is not None and not self.deviations

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset.value,
            "path": self.path,
            "total_lines": self.total_lines,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "distribution": dict(sorted(self.distribution.items())),
            "reference": dict(sorted(self.reference.items())) if self.reference else None,
            "deviations": {
                label: {"observed": obs, "expected": exp}
                for label, (obs, exp) in sorted(self.deviations.items())
            },
            "matches_reference": self.matches_reference,
        }


def validate_data(path: str | Path, dataset: Dataset) -> ValidationReport:
    """Load a dataset file and compare its class distribution against the
    published reference counts, when a reference exists for the dataset."""
    result = load_dataset(path, dataset)
    distribution = result.class_distribution()
    reference = REFERENCE_DISTRIBUTIONS.get(dataset)
    deviations: dict[str, tuple[int, int]] = {}
    if reference is not None:
        for label in sorted(set(reference) | set(distribution)):
            observed = distribution.get(label, 0)
            expected = reference.get(label, 0)
            if observed != expected:
                deviations[label] = (observed, expected)
    return ValidationReport(
        dataset=dataset,
        path=str(result.path),
        total_lines=result.total_lines,
        accepted=result.accepted,
        rejected=result.rejected,
        distribution=distribution,
        reference=reference,
        deviations=deviations,
    )
