"""Acceptance gate: one check per shipped guarantee, one status line each.

Every check prints `ACCEPTANCE <n>: PASS|FAIL|SKIP - detail`; the conftest
terminal-summary hook repeats those lines after the pytest status output.
Checks 1-3 compare library code against the independent oracles in
oracles.py; 4-5 pin the determinism and inference-economy guarantees on the
frozen 12-claim fixture; 6 validates dataset class counts against the
published reference distributions; 7 reproduces the published accuracy
numbers with real checkpoints and only runs where those are available
(CLAIMCHECK_RUN_EXTENDED=1 plus local data snapshots).
"""

from __future__ import annotations

import itertools
import json
import os
import random
import time
from pathlib import Path

import pytest

from claimcheck.aggregation import aggregate_majority, aggregate_weighted
from claimcheck.calibration import recalibrate
from claimcheck.cli import build_config, build_parser
from claimcheck.cli import main as cli_main
from claimcheck.core import Dataset, VerdictLabel
from claimcheck.evaluation import compute_metrics
from claimcheck.ingestion import validate_data
from claimcheck.pipeline import BackendKind, PipelineConfig, build_backends, run, sweep

from conftest import make_raw
from oracles import (
    LABELS,
    oracle_majority,
    oracle_metrics,
    oracle_recalibrate,
    oracle_weighted_mean,
)

DATA_DIR = Path(__file__).parent / "data"
FIXTURE = DATA_DIR / "stub_fixture.jsonl"
EXPECTED_VERDICTS = DATA_DIR / "stub_fixture_expected_verdicts.jsonl"
CONFIGS = Path(__file__).parent.parent / "configs"


def run_criterion(number: int, description: str, body, budget: float | None = None) -> None:
    """Execute one check, print its status line, enforce its time budget."""
    started = time.perf_counter()
    try:
        detail = body()
    except BaseException as exc:
        status = "SKIP" if isinstance(exc, pytest.skip.Exception) else "FAIL"
        print(f"ACCEPTANCE {number}: {status} - {description}: {exc}")
        raise
    elapsed = time.perf_counter() - started
    timing = f"{elapsed:.2f}s"
    if budget is not None:
        timing += f" of {budget:g}s budget"
    print(f"ACCEPTANCE {number}: PASS - {description} ({detail}; {timing})")
    if budget is not None:
        assert elapsed < budget, f"check took {elapsed:.2f}s, budget {budget:g}s"


def simplex_point(rng: random.Random) -> tuple[float, float, float]:
    draws = [rng.random() + 1e-9 for _ in range(3)]
    total = sum(draws)
    return (draws[0] / total, draws[1] / total, draws[2] / total)


def labeled_vector(label: str, confidence: float) -> tuple[float, float, float]:
    """Probability vector whose argmax is `label` at exactly `confidence`.
    Needs confidence > 1/3 so the argmax is strict."""
    rest = (1.0 - confidence) / 2.0
    values = [rest, rest, rest]
    values[LABELS.index(label)] = confidence
    return (values[0], values[1], values[2])


def stub_config(**overrides) -> PipelineConfig:
    base = dict(
        data_path=str(FIXTURE),
        dataset=Dataset.FEVER,
        backend=BackendKind.STUB,
        threshold=0.6,
        cache_dir=None,
        out_dir=None,
        workers=1,
        seed=0,
    )
    base.update(overrides)
    return PipelineConfig(**base)


def snapshot_file(path: Path, counts: dict[str, int]) -> str:
    lines = []
    serial = 0
    for label, n in counts.items():
        for _ in range(n):
            serial += 1
            lines.append(json.dumps({
                "claim": f"Synthetic claim number {serial}.",
                "evidence": f"Synthetic evidence number {serial}.",
                "label": label,
            }))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_acceptance_1_recalibration_matches_oracle():
    def body():
        rng = random.Random(101)
        triples: list[tuple[tuple[float, float, float], float]] = []
        for _ in range(1100):
            probs = simplex_point(rng)
            threshold = rng.choice((0.0, 1.0, rng.random(), round(rng.random(), 1)))
            triples.append((probs, threshold))
        for _ in range(150):
            probs = simplex_point(rng)
            triples.append((probs, max(probs)))  # exact boundary
        boundary = 0
        for probs, threshold in triples:
            raw = make_raw(probs)
            calibrated = recalibrate(raw, threshold)
            assert calibrated.label.value == oracle_recalibrate(
                raw.label.value, raw.confidence, threshold
            )
            assert calibrated.downgraded == (raw.confidence < threshold)
            if raw.confidence == threshold:
                boundary += 1
                assert not calibrated.downgraded  # boundary keeps the label
            again = recalibrate(calibrated.as_raw(), threshold)
            assert again.label == calibrated.label
            assert again.effective_probs() == calibrated.effective_probs()
            identity = recalibrate(raw, 0.0)
            assert identity.label == raw.label and not identity.downgraded
        grid = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
        for probs, _ in triples[:400]:
            raw = make_raw(probs)
            kept = [not recalibrate(raw, t).downgraded for t in grid]
            # once a verdict is downgraded it stays downgraded at higher taus
            assert all(a or not b for a, b in zip(kept, kept[1:]))
        return (
            f"{len(triples)} random triples match the piecewise oracle, "
            f"{boundary} exact-boundary keeps, idempotent, tau=0 is identity, "
            f"monotone over a 6-point grid on 400 profiles"
        )

    run_criterion(
        1, "confidence recalibration matches the independent rule", body, budget=5.0
    )


def test_acceptance_2_metrics_match_bruteforce_oracle():
    def body():
        rng = random.Random(202)
        checked = 0
        for case in range(100):
            n = rng.randint(1, 200)
            if case % 10 == 0:
                # degenerate: single-class gold, disjoint predictions, so
                # every zero-division convention is on the line
                gold = [LABELS[0]] * n
                predictions = [rng.choice(LABELS[1:]) for _ in range(n)]
            else:
                gold = [rng.choice(LABELS) for _ in range(n)]
                predictions = [rng.choice(LABELS) for _ in range(n)]
            expected = oracle_metrics(predictions, gold)
            report = compute_metrics(
                [VerdictLabel(p) for p in predictions],
                [VerdictLabel(g) for g in gold],
            )
            assert report.n == expected["n"]
            assert abs(report.accuracy - expected["accuracy"]) <= 1e-9
            for label in LABELS:
                ours = report.per_class[VerdictLabel(label)]
                theirs = expected["per_class"][label]
                for key in ("precision", "recall", "f1"):
                    assert abs(getattr(ours, key) - theirs[key]) <= 1e-9, (
                        f"{label} {key} diverged on case {case}"
                    )
                assert ours.support == theirs["support"]
                assert ours.predicted == theirs["predicted"]
            for key in ("precision", "recall", "f1"):
                assert abs(getattr(report.macro, key) - expected["macro"][key]) <= 1e-9
                assert (
                    abs(getattr(report.weighted, key) - expected["weighted"][key])
                    <= 1e-9
                )
            checked += 1
        return f"{checked} random instances (n up to 200) agree at 1e-9 on every field"

    run_criterion(
        2, "evaluation metrics match the brute-force confusion matrix", body,
        budget=10.0,
    )


def test_acceptance_3_aggregation_exhaustive_and_invariant():
    def body():
        confidences = (0.91, 0.83, 0.77, 0.88, 0.72)
        exhaustive = 0
        for k in range(1, 6):
            for combo in itertools.product(LABELS, repeat=k):
                raws = [
                    make_raw(
                        labeled_vector(label, confidences[i]),
                        evidence_id=f"c1/e{i}",
                    )
                    for i, label in enumerate(combo)
                ]
                calibrated = [recalibrate(raw, 0.0) for raw in raws]
                final = aggregate_majority(calibrated)
                assert final.label.value == oracle_majority(list(combo)), combo
                exhaustive += 1
        assert exhaustive == 3 + 9 + 27 + 81 + 243

        rng = random.Random(303)
        invariance = 0
        for _ in range(200):
            k = rng.randint(1, 5)
            vectors = [simplex_point(rng) for _ in range(k)]
            weights = [rng.random() + 0.01 for _ in range(k)]
            calibrated = [
                recalibrate(make_raw(vec, evidence_id=f"c1/e{i}"), 0.0)
                for i, vec in enumerate(vectors)
            ]
            base = aggregate_weighted(calibrated, weights)
            mean = oracle_weighted_mean(vectors, weights)
            assert abs(base.confidence - mean[LABELS.index(base.label.value)]) <= 1e-12

            order = rng.sample(range(k), k)
            permuted = aggregate_weighted(
                [calibrated[i] for i in order], [weights[i] for i in order]
            )
            assert permuted.label == base.label
            assert abs(permuted.confidence - base.confidence) <= 1e-12

            scale = rng.uniform(0.5, 50.0)
            scaled = aggregate_weighted(calibrated, [w * scale for w in weights])
            assert scaled.label == base.label
            assert abs(scaled.confidence - base.confidence) <= 1e-12
            invariance += 1
        return (
            f"all {exhaustive} vote patterns up to 5 inputs match the count oracle; "
            f"{invariance} weighted cases permutation- and scale-invariant at 1e-12"
        )

    run_criterion(
        3, "aggregation matches the vote oracle and weighting invariants", body,
        budget=10.0,
    )


def test_acceptance_4_determinism_on_frozen_fixture(tmp_path):
    def body():
        expected = EXPECTED_VERDICTS.read_text(encoding="utf-8")
        cache_dir = tmp_path / "cache"
        streams = {
            "repeat run 1": run(stub_config()).verdict_lines(),
            "repeat run 2": run(stub_config()).verdict_lines(),
            "cold cache": run(stub_config(cache_dir=str(cache_dir))).verdict_lines(),
            "warm cache": run(stub_config(cache_dir=str(cache_dir))).verdict_lines(),
            "workers=1": run(stub_config(workers=1)).verdict_lines(),
            "workers=4": run(stub_config(workers=4)).verdict_lines(),
        }
        for name, text in streams.items():
            assert text == expected, f"{name} diverged from the frozen verdict stream"
        return (
            "6 verdict streams (repeat, cold/warm cache, workers 1 and 4) "
            "byte-identical to the frozen 12-claim fixture"
        )

    run_criterion(
        4, "verdict stream is byte-deterministic on the stub fixture", body,
        budget=5.0,
    )


def test_acceptance_5_sweep_adds_zero_classifier_calls(tmp_path):
    def body():
        config = stub_config()
        single = build_backends(config)
        run(config, backends=single)
        single_calls = single.classifier.calls

        fresh = build_backends(config)
        outcome = sweep(config, [0.6, 0.7, 0.8, 0.9], backends=fresh)
        assert len(outcome.reports) == 4
        assert fresh.classifier.calls == single_calls, (
            "the 4-threshold sweep must cost exactly one inference pass"
        )

        cache_config = stub_config(cache_dir=str(tmp_path / "cache"))
        run(cache_config)
        warm = build_backends(cache_config)
        warm_outcome = sweep(cache_config, [0.6, 0.7, 0.8, 0.9], backends=warm)
        assert len(warm_outcome.reports) == 4
        assert warm.classifier.inference_calls == 0, (
            "a warm cache must serve the whole sweep without any classifier call"
        )
        return (
            f"grid {{0.6,0.7,0.8,0.9}} costs {single_calls} calls cold "
            f"(same as one run) and 0 calls on a warm cache"
        )

    run_criterion(5, "threshold sweep reuses verdicts, no re-inference", body, budget=5.0)


def test_acceptance_6_reference_distribution_validation(tmp_path, capsys):
    def body():
        fever_counts = {"ENTAILMENT": 792, "CONTRADICTION": 812, "NEUTRAL": 683}
        climate_counts = {"SUPPORTS": 375, "REFUTES": 164, "NOT_ENOUGH_INFO": 996}
        legs = []

        report = validate_data(
            snapshot_file(tmp_path / "fever.jsonl", fever_counts), Dataset.FEVER
        )
        assert report.accepted == 2287 and report.matches_reference
        report = validate_data(
            snapshot_file(tmp_path / "climate.jsonl", climate_counts),
            Dataset.CLIMATE_FEVER,
        )
        assert report.accepted == 1535 and report.matches_reference
        legs.append("exact-count snapshots match the reference (2287 and 1535 rows)")

        perturbed = dict(fever_counts, NEUTRAL=600)
        code = cli_main([
            "validate-data",
            "--data-path", snapshot_file(tmp_path / "fever_off.jsonl", perturbed),
            "--dataset", "fever",
        ])
        captured = capsys.readouterr()
        assert code == 0, "a deviating distribution must not fail the command"
        assert "DEVIATION" in captured.err
        assert "NEUTRAL observed 600 expected 683" in captured.err
        assert json.loads(captured.out)["matches_reference"] is False
        legs.append("a deviating snapshot is reported on stderr, exit code stays 0")

        for env, dataset, name in (
            ("CLAIMCHECK_FEVER_DATA", Dataset.FEVER, "fever"),
            ("CLAIMCHECK_CLIMATE_DATA", Dataset.CLIMATE_FEVER, "climate-fever"),
        ):
            local = os.environ.get(env)
            if not local:
                legs.append(f"{name} snapshot leg not run ({env} unset)")
                continue
            report = validate_data(local, dataset)
            assert report.reference is not None
            if report.matches_reference:
                legs.append(f"{name} snapshot matches the reference counts")
            else:
                legs.append(
                    f"{name} snapshot deviates {dict(report.deviations)} "
                    "(reported, not hidden)"
                )
        return "; ".join(legs)

    run_criterion(
        6, "class distributions validate against the published counts", body
    )


def preset_config(name: str, **overrides) -> PipelineConfig:
    argv = ["run", "--config", str(CONFIGS / name)]
    for key, value in overrides.items():
        argv += [f"--{key.replace('_', '-')}", str(value)]
    return build_config(build_parser().parse_args(argv))


def test_acceptance_7_extended_reproduction():
    if os.environ.get("CLAIMCHECK_RUN_EXTENDED") != "1":
        print(
            "ACCEPTANCE 7: SKIP - extended reproduction needs "
            "CLAIMCHECK_RUN_EXTENDED=1, local snapshots in "
            "CLAIMCHECK_FEVER_DATA / CLAIMCHECK_CLIMATE_DATA, and the model "
            "checkpoints; not available in this environment"
        )
        pytest.skip(
            "extended reproduction disabled; set CLAIMCHECK_RUN_EXTENDED=1 "
            "with CLAIMCHECK_FEVER_DATA and CLAIMCHECK_CLIMATE_DATA"
        )
    fever_path = os.environ.get("CLAIMCHECK_FEVER_DATA")
    climate_path = os.environ.get("CLAIMCHECK_CLIMATE_DATA")

    def body():
        if not fever_path or not climate_path:
            raise AssertionError(
                "CLAIMCHECK_RUN_EXTENDED=1 but CLAIMCHECK_FEVER_DATA / "
                "CLAIMCHECK_CLIMATE_DATA do not point at local snapshots"
            )
        lines = []
        failures = []

        def check(name: str, observed: float, expected: float, tol: float = 0.03):
            ok = abs(observed - expected) <= tol
            lines.append(
                f"{name} {observed:.3f} (target {expected:.2f}+/-{tol:g})"
            )
            if not ok:
                failures.append(lines[-1])

        grid = sweep(
            preset_config("fever-recalibrated.conf", data_path=fever_path),
            [0.0, 0.6, 0.7, 0.8, 0.9],
        )
        by_tau = dict(grid.reports)
        check("fever baseline tau=0", by_tau[0.0].accuracy, 0.42)
        check("fever recalibrated tau=0.6", by_tau[0.6].accuracy, 0.48)
        check("fever tau=0.7", by_tau[0.7].accuracy, 0.47)
        check("fever tau=0.8", by_tau[0.8].accuracy, 0.46)
        check("fever tau=0.9", by_tau[0.9].accuracy, 0.45)

        span = run(preset_config("fever-span.conf", data_path=fever_path))
        assert span.report is not None
        check("fever span tau=0.6", span.report.accuracy, 0.36)

        climate = run(preset_config("climate-tau07.conf", data_path=climate_path))
        assert climate.report is not None
        check("climate tau=0.7", climate.report.accuracy, 0.66)

        assert not failures, "out of tolerance: " + "; ".join(failures)
        return "; ".join(lines)

    run_criterion(7, "published accuracy table reproduced with local checkpoints", body)
