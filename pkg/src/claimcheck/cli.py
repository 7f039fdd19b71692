"""Command-line interface.

Exit codes: 0 success, 1 systemic failure (unreadable data, backend down),
2 configuration error (unknown flag, bad value, broken config file).
Result payloads go to stdout or --out; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .aggregation import AggregationMethod
from .attribution import AttributionMode
from .core import ClaimcheckError, ConfigError, Dataset
from .evaluation import (
    EvaluationReport,
    compare_runs,
    render_comparison,
    render_report,
    report_from_dict,
)
from .ingestion import validate_data
from .pipeline import (
    BackendKind,
    PipelineConfig,
    ablate,
    default_cache_dir,
    run,
    sweep,
)

logger = logging.getLogger(__name__)

_ENUM_FIELDS = {
    "dataset": Dataset,
    "attribution": AttributionMode,
    "aggregation": AggregationMethod,
    "backend": BackendKind,
}
_INT_FIELDS = ("workers", "seed", "max_length")
_FLOAT_FIELDS = ("threshold",)
_STR_FIELDS = (
    "data_path",
    "model",
    "extractor_model",
    "embedder_model",
    "endpoint_url",
    "cache_dir",
    "out_dir",
    "report_format",
)
_KNOWN_KEYS = (
    set(_ENUM_FIELDS) | set(_INT_FIELDS) | set(_FLOAT_FIELDS) | set(_STR_FIELDS)
    | {"thresholds"}
)


def parse_thresholds(raw: str) -> tuple[float, ...]:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    if not parts:
        raise ConfigError("thresholds list is empty")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad threshold in {raw!r}: {exc}") from exc


def parse_config_file(path: str | Path) -> dict:
    """Flat key = value format; keys mirror PipelineConfig field names.
    Blank lines and '#' comments are ignored."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{line_number}: expected key = value, got {line!r}")
        key, _, value = text.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip().strip("\"'")
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{line_number}: unknown config key {key!r}")
        values[key] = value
    return values


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    if key in _ENUM_FIELDS:
        enum_type = _ENUM_FIELDS[key]
        try:
            return enum_type(value)
        except ValueError as exc:
            allowed = ", ".join(e.value for e in enum_type)
            raise ConfigError(f"{key} must be one of: {allowed}; got {value!r}") from exc
    if key in _INT_FIELDS:
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    if key in _FLOAT_FIELDS:
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    if key == "thresholds":
        return parse_thresholds(value)
    return value


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Merge precedence: defaults < config file < explicit flags."""
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(parse_config_file(args.config))
    for key in _KNOWN_KEYS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    merged = {key: _coerce(key, value) for key, value in merged.items()}
    if "cache_dir" not in merged:
        merged["cache_dir"] = default_cache_dir()
    try:
        return PipelineConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument(
        "--dataset", choices=[d.value for d in Dataset], dest="dataset"
    )
    parser.add_argument("--data-path", dest="data_path", help="line-delimited dataset file")
    parser.add_argument(
        "--attribution", choices=[m.value for m in AttributionMode], dest="attribution"
    )
    parser.add_argument("--threshold", type=float, dest="threshold")
    parser.add_argument(
        "--thresholds", dest="thresholds", help="comma-separated grid, e.g. 0.6,0.7"
    )
    parser.add_argument(
        "--aggregation", choices=[m.value for m in AggregationMethod], dest="aggregation"
    )
    parser.add_argument("--model", dest="model", help="classifier model identifier")
    parser.add_argument("--extractor-model", dest="extractor_model")
    parser.add_argument("--embedder-model", dest="embedder_model")
    parser.add_argument(
        "--backend", choices=[b.value for b in BackendKind], dest="backend"
    )
    parser.add_argument("--endpoint-url", dest="endpoint_url")
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument(
        "--report", choices=["json", "csv", "md"], dest="report_format"
    )
    parser.add_argument("--workers", type=int, dest="workers")
    parser.add_argument("--seed", type=int, dest="seed")
    parser.add_argument("--max-length", type=int, dest="max_length")


def _cmd_run(args: argparse.Namespace) -> int:
    config = build_config(args)
    if not config.data_path:
        raise ConfigError("run requires --data-path (or data_path in the config file)")
    outcome = run(config)
    if config.out_dir:
        logger.info("wrote %d verdicts to %s", len(outcome.rows), config.out_dir)
        if outcome.report is not None:
            print(render_report(outcome.report, config.report_format), end="")
    else:
        sys.stdout.write(outcome.verdict_lines())
        if outcome.report is not None:
            sys.stderr.write(render_report(outcome.report, config.report_format))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = build_config(args)
    if not config.data_path:
        raise ConfigError("sweep requires --data-path (or data_path in the config file)")
    outcome = sweep(config)
    named = [(f"tau={threshold:g}", report) for threshold, report in outcome.reports]
    if len(named) >= 2:
        rendering = render_comparison(compare_runs(named), config.report_format)
    else:
        rendering = render_report(named[0][1], config.report_format)
    print(rendering, end="")
    if config.out_dir:
        logger.info("wrote per-threshold reports to %s", config.out_dir)
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = build_config(args)
    if not config.data_path:
        raise ConfigError("ablate requires --data-path (or data_path in the config file)")
    outcome = ablate(config)
    rows = [
        {
            "attribution": mode_value,
            "threshold": threshold,
            "accuracy": report.accuracy,
            "macro_f1": report.macro.f1,
            "weighted_f1": report.weighted.f1,
        }
        for (mode_value, threshold), report in sorted(outcome.cells.items())
    ]
    print(json.dumps({"rows": rows}, indent=2, sort_keys=True))
    if config.out_dir:
        logger.info("wrote ablation summary to %s", config.out_dir)
    return 0


def _load_report_file(path: str) -> EvaluationReport:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return report_from_dict(payload)
    except FileNotFoundError as exc:
        raise ConfigError(f"report file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ClaimcheckError(f"unreadable report file {path}: {exc}") from exc


def _cmd_report(args: argparse.Namespace) -> int:
    fmt = args.report_format or "md"
    stems = [Path(p).stem for p in args.inputs]
    names = stems if len(set(stems)) == len(stems) else list(args.inputs)
    reports = [(name, _load_report_file(p)) for name, p in zip(names, args.inputs)]
    if len(reports) == 1:
        rendering = render_report(reports[0][1], fmt)
    else:
        rendering = render_comparison(compare_runs(reports), fmt)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"report.{fmt}"
        target.write_text(rendering, encoding="utf-8")
        logger.info("wrote %s", target)
    else:
        print(rendering, end="")
    return 0


def _cmd_validate_data(args: argparse.Namespace) -> int:
    if not args.data_path:
        raise ConfigError("validate-data requires --data-path")
    try:
        dataset = Dataset(args.dataset) if args.dataset else Dataset.CUSTOM
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = validate_data(args.data_path, dataset)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if report.rejected:
        sys.stderr.write(f"rejected {report.rejected} of {report.total_lines} lines\n")
    if report.reference is not None and not report.matches_reference:
        sys.stderr.write(
            "DEVIATION from the published reference distribution: "
            + ", ".join(
                f"{label} observed {obs} expected {exp}"
                for label, (obs, exp) in sorted(report.deviations.items())
            )
            + "\n"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimcheck",
        description="Claim verification: attribution, entailment, recalibration.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run the pipeline once")
    _add_pipeline_flags(run_parser)
    run_parser.set_defaults(handler=_cmd_run)

    sweep_parser = commands.add_parser(
        "sweep", help="evaluate a threshold grid from one inference pass"
    )
    _add_pipeline_flags(sweep_parser)
    sweep_parser.set_defaults(handler=_cmd_sweep)

    ablate_parser = commands.add_parser(
        "ablate", help="attribution-mode x threshold matrix"
    )
    _add_pipeline_flags(ablate_parser)
    ablate_parser.set_defaults(handler=_cmd_ablate)

    report_parser = commands.add_parser(
        "report", help="render or compare saved report files"
    )
    report_parser.add_argument("--inputs", nargs="+", required=True)
    report_parser.add_argument(
        "--report", choices=["json", "csv", "md"], dest="report_format"
    )
    report_parser.add_argument("--out", dest="out_dir")
    report_parser.set_defaults(handler=_cmd_report)

    validate_parser = commands.add_parser(
        "validate-data", help="check records and report the class distribution"
    )
    validate_parser.add_argument("--data-path", dest="data_path", required=True)
    validate_parser.add_argument(
        "--dataset", choices=[d.value for d in Dataset], dest="dataset"
    )
    validate_parser.set_defaults(handler=_cmd_validate_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except ClaimcheckError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
