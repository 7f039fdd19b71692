"""claimcheck: evidence-attributed claim verification with confidence
recalibration.

Pipeline: attribute evidence to each claim (full passages or extracted
spans), classify each pairing with an entailment model, downgrade
low-confidence verdicts to NOT_ENOUGH_INFO at a configurable threshold,
aggregate per-evidence verdicts into one claim verdict, and evaluate
against gold labels. Threshold sweeps replay cached probability vectors
instead of re-running inference.
"""

from .aggregation import (
    AggregationMethod,
    FinalVerdict,
    aggregate_majority,
    aggregate_weighted,
)
from .attribution import (
    AttributedEvidence,
    AttributionMode,
    attribute_full,
    attribute_span,
    cosine_similarity,
    score_attribution,
)
from .calibration import CalibratedVerdict, recalibrate
from .core import (
    CLASS_ORDER,
    PACKAGE_VERSION,
    BackendError,
    BackendUnavailableError,
    Claim,
    ClaimcheckError,
    ConfigError,
    Dataset,
    DatasetError,
    EvidencePassage,
    MalformedBackendOutputError,
    NLILabel,
    ProbabilityVector,
    VerdictLabel,
    map_nli_to_verdict,
    map_verdict_to_nli,
)
from .evaluation import (
    EvaluationReport,
    compare_runs,
    compute_metrics,
    render_report,
    sweep_thresholds,
)
from .ingestion import LoadResult, load_dataset, normalize_label, validate_data
from .pipeline import (
    BackendKind,
    PipelineConfig,
    RunResult,
    ablate,
    build_backends,
    run,
    sweep,
)
from .verification import RawVerdict, format_input, verify_pair

__version__ = PACKAGE_VERSION

__all__ = [
    "AggregationMethod",
    "FinalVerdict",
    "aggregate_majority",
    "aggregate_weighted",
    "AttributedEvidence",
    "AttributionMode",
    "attribute_full",
    "attribute_span",
    "cosine_similarity",
    "score_attribution",
    "CalibratedVerdict",
    "recalibrate",
    "CLASS_ORDER",
    "BackendError",
    "BackendUnavailableError",
    "Claim",
    "ClaimcheckError",
    "ConfigError",
    "Dataset",
    "DatasetError",
    "EvidencePassage",
    "MalformedBackendOutputError",
    "NLILabel",
    "ProbabilityVector",
    "VerdictLabel",
    "map_nli_to_verdict",
    "map_verdict_to_nli",
    "EvaluationReport",
    "compare_runs",
    "compute_metrics",
    "render_report",
    "sweep_thresholds",
    "LoadResult",
    "load_dataset",
    "normalize_label",
    "validate_data",
    "BackendKind",
    "PipelineConfig",
    "RunResult",
    "ablate",
    "build_backends",
    "run",
    "sweep",
    "verify_pair",
    "format_input",
    "RawVerdict",
    "__version__",
]
