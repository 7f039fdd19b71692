"""On-disk verdict cache.

Layout: one JSON-lines file per shard (first two hex chars of the key)
inside the cache directory, append-only. Keys are content hashes over
(model_id, NFC-normalized premise, NFC-normalized hypothesis, truncation
policy version), so a warm cache can never serve a verdict computed under a
different model or truncation regime. Corrupt entries are quarantined and
treated as misses; they never poison a run.

Readers are lock-free after a shard is loaded; writers are serialized with
an in-process lock (the pipeline's parallelism is thread-based).
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import unicodedata
from pathlib import Path

from ..core import MalformedBackendOutputError, ProbabilityVector
from .base import TRUNCATION_POLICY_VERSION, ClassifierOutput, NLIClassifier

logger = logging.getLogger(__name__)

QUARANTINE_FILE = "quarantine.jsonl"


def cache_key(
    model_id: str,
    premise: str,
    hypothesis: str,
    policy_version: str = TRUNCATION_POLICY_VERSION,
) -> str:
    """Content hash identifying one classification input."""
    canonical = json.dumps(
        [
            model_id,
            unicodedata.normalize("NFC", premise),
            unicodedata.normalize("NFC", hypothesis),
            policy_version,
        ],
        ensure_ascii=True,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class VerdictCache:
    """Sharded append-friendly key-value store for classifier outputs."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except (FileExistsError, NotADirectoryError) as exc:
            raise ValueError(f"cache path is not a directory: {self.directory}") from exc
        self._lock = threading.Lock()
        self._shards: dict[str, dict[str, ClassifierOutput]] = {}
        self.quarantined = 0

    def _shard_path(self, shard: str) -> Path:
        return self.directory / f"{shard}.jsonl"

    def _load_shard(self, shard: str) -> dict[str, ClassifierOutput]:
        loaded = self._shards.get(shard)
        if loaded is not None:
            return loaded
        entries: dict[str, ClassifierOutput] = {}
        path = self._shard_path(shard)
        corrupt: list[str] = []
        if path.is_file():
            good_lines: list[str] = []
            for line in path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    key = obj["key"]
                    probs = ProbabilityVector(*[float(p) for p in obj["probs"]])
                    truncated = bool(obj["truncated"])
                except (
                    json.JSONDecodeError,
                    KeyError,
                    TypeError,
                    ValueError,
                    MalformedBackendOutputError,
                ):
                    corrupt.append(line)
                    continue
                entries[key] = ClassifierOutput(probs=probs, truncated=truncated)
                good_lines.append(line)
            if corrupt:
                self._quarantine(shard, path, good_lines, corrupt)
        self._shards[shard] = entries
        return entries

    def _quarantine(
        self, shard: str, path: Path, good_lines: list[str], corrupt: list[str]
    ) -> None:
        """Move unreadable lines to the quarantine file and rewrite the shard
        with the surviving entries."""
        quarantine_path = self.directory / QUARANTINE_FILE
        with quarantine_path.open("a", encoding="utf-8") as handle:
            for line in corrupt:
                handle.write(line + "\n")
        rewritten = "".join(line + "\n" for line in good_lines)
        path.write_text(rewritten, encoding="utf-8")
        self.quarantined += len(corrupt)
        logger.warning(
            "cache shard %s: quarantined %d corrupt entr%s",
            shard,
            len(corrupt),
            "y" if len(corrupt) == 1 else "ies",
        )

    def get(self, key: str) -> ClassifierOutput | None:
        shard = key[:2]
        with self._lock:
            return self._load_shard(shard).get(key)

    def put(self, key: str, output: ClassifierOutput) -> None:
        shard = key[:2]
        line = json.dumps(
            {
                "key": key,
                "probs": list(output.probs.as_tuple()),
                "truncated": output.truncated,
            },
            sort_keys=True,
        )
        with self._lock:
            entries = self._load_shard(shard)
            entries[key] = output
            with self._shard_path(shard).open("a", encoding="utf-8") as handle:
                handle.write(line + "\n")

    def __len__(self) -> int:
        with self._lock:
            for path in self.directory.glob("??.jsonl"):
                self._load_shard(path.stem)
            return sum(len(entries) for entries in self._shards.values())


class CachingClassifier(NLIClassifier):
    """Wrap any classifier with the verdict cache.

    Warm lookups return the stored output without touching the inner
    backend, so the inner backend's call counter measures real inference
    exactly. The wrapper presents the inner model_id, separator, and length
    budget so caching stays transparent to callers.
    """

    def __init__(self, inner: NLIClassifier, cache: VerdictCache) -> None:
        super().__init__(model_id=inner.model_id, max_length=inner.max_length)
        self.separator = inner.separator
        self.declared_max_in_flight = inner.declared_max_in_flight
        self.inner = inner
        self.cache = cache
        self.hits = 0
        self.misses = 0
        self._stats_lock = threading.Lock()

    @property
    def calls(self) -> int:
        """Real inference count, i.e. the wrapped backend's counter."""
        return self.inner.calls

    @property
    def inference_calls(self) -> int:
        return self.inner.calls

    def classify(
        self, premise: str, hypothesis: str, joined: str | None = None
    ) -> ClassifierOutput:
        # Key on the original texts; the inner classify applies truncation.
        key = cache_key(self.model_id, premise, hypothesis)
        cached = self.cache.get(key)
        if cached is not None:
            with self._stats_lock:
                self.hits += 1
            return cached
        output = self.inner.classify(premise, hypothesis, joined)
        self.cache.put(key, output)
        with self._stats_lock:
            self.misses += 1
        return output

    def _classify(
        self, premise: str, hypothesis: str, joined: str | None
    ) -> ProbabilityVector:
        raise AssertionError("CachingClassifier.classify never delegates here")
