from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from claimcheck.core import Claim, Dataset, EvidencePassage, ProbabilityVector
from claimcheck.verification import RawVerdict

# The worked-example pair used across attribution/verification tests.
KENNEDY_CLAIM = "Caroline Kennedy is American."
KENNEDY_EVIDENCE = (
    "Caroline Bouvier Kennedy (born November 27, 1957) is an American author, "
    "attorney, and diplomat who served as the United States Ambassador to "
    "Japan from 2013 to 2017."
)


def make_raw(
    probs: tuple[float, float, float],
    claim_id: str = "c1",
    evidence_id: str = "c1/e0",
    truncated: bool = False,
) -> RawVerdict:
    return RawVerdict.from_probs(
        claim_id=claim_id,
        evidence_id=evidence_id,
        probs=ProbabilityVector(*probs),
        truncated=truncated,
    )


@pytest.fixture
def kennedy_claim() -> Claim:
    return Claim(id="kennedy", text=KENNEDY_CLAIM, dataset=Dataset.CUSTOM)


@pytest.fixture
def kennedy_passage() -> EvidencePassage:
    return EvidencePassage(id="kennedy/e0", text=KENNEDY_EVIDENCE)


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")
    return path


def _acceptance_lines(report) -> list[str]:
    lines = [
        line
        for line in (getattr(report, "capstdout", "") or "").splitlines()
        if line.startswith("ACCEPTANCE ")
    ]
    if lines:
        return lines
    name = report.nodeid.rsplit("::", 1)[-1]
    digits = [c for c in name if c.isdigit()]
    number = digits[0] if digits else "?"
    if report.outcome == "skipped":
        reason = ""
        if isinstance(report.longrepr, tuple):
            reason = str(report.longrepr[2]).removeprefix("Skipped: ")
        return [f"ACCEPTANCE {number}: SKIP - {reason}"]
    if report.outcome == "failed":
        return [f"ACCEPTANCE {number}: FAIL - {name} errored before reporting"]
    return []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One status line per acceptance criterion at the end of the run."""
    lines: list[str] = []
    for reports in terminalreporter.stats.values():
        for report in reports:
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            if getattr(report, "when", None) != "call":
                continue
            lines.extend(_acceptance_lines(report))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(lines)):
            terminalreporter.write_line(line)


@pytest.fixture
def fever_style_file(tmp_path: Path) -> Path:
    rows = [
        {
            "claim": "The sky is blue.",
            "evidence": "The sky appears blue in daylight.",
            "label": "ENTAILMENT",
        },
        {
            "claim": "Cats are reptiles.",
            "evidence": ["Cats are mammals.", "Reptiles are cold-blooded animals."],
            "label": "CONTRADICTION",
        },
        {
            "claim": "Pluto hosts a subway system.",
            "evidence": "Pluto is a dwarf planet in the Kuiper belt.",
            "label": "NEUTRAL",
        },
        {
            "claim": "Honey never spoils.",
            "evidence": "Archaeologists found edible honey in ancient tombs.",
            "label": "ENTAILMENT",
        },
    ]
    return write_jsonl(tmp_path / "fever_style.jsonl", rows)
