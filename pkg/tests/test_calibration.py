from __future__ import annotations

import random

import pytest

from claimcheck.calibration import CalibratedVerdict, recalibrate, validate_threshold
from claimcheck.core import ProbabilityVector, VerdictLabel

from conftest import make_raw
from oracles import oracle_recalibrate


def random_raw(rng: random.Random):
    """Random verdict with a controlled confidence spread."""
    values = sorted([rng.random(), rng.random()])
    probs = [values[0], values[1] - values[0], 1.0 - values[1]]
    rng.shuffle(probs)
    return make_raw((probs[0], probs[1], max(0.0, probs[2])))


class TestWorkedExamples:
    def test_supported_above_threshold_kept(self):
        raw = make_raw((0.91, 0.05, 0.04))
        verdict = recalibrate(raw, 0.6)
        assert verdict.label is VerdictLabel.SUPPORTED
        assert not verdict.downgraded

    def test_refuted_below_threshold_downgraded(self):
        raw = make_raw((0.2, 0.55, 0.25))
        verdict = recalibrate(raw, 0.6)
        assert verdict.label is VerdictLabel.NOT_ENOUGH_INFO
        assert verdict.downgraded

    def test_boundary_keeps_label(self):
        raw = make_raw((0.6, 0.3, 0.1))
        verdict = recalibrate(raw, 0.6)
        assert verdict.label is VerdictLabel.SUPPORTED
        assert not verdict.downgraded

    def test_low_confidence_nei_still_flagged_downgraded(self):
        raw = make_raw((0.3, 0.3, 0.4))
        verdict = recalibrate(raw, 0.6)
        assert verdict.label is VerdictLabel.NOT_ENOUGH_INFO
        assert verdict.downgraded


class TestThresholdValidation:
    def test_rejects_out_of_range(self):
        raw = make_raw((0.5, 0.3, 0.2))
        with pytest.raises(ValueError):
            recalibrate(raw, -0.1)
        with pytest.raises(ValueError):
            recalibrate(raw, 1.5)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            validate_threshold(float("nan"))

    def test_accepts_bounds(self):
        assert validate_threshold(0.0) == 0.0
        assert validate_threshold(1.0) == 1.0


class TestConstructionInvariants:
    def test_downgraded_must_carry_nei(self):
        raw = make_raw((0.5, 0.3, 0.2))
        with pytest.raises(ValueError):
            CalibratedVerdict(
                raw=raw, threshold=0.6, label=VerdictLabel.SUPPORTED, downgraded=True
            )

    def test_kept_must_carry_raw_label(self):
        raw = make_raw((0.7, 0.2, 0.1))
        with pytest.raises(ValueError):
            CalibratedVerdict(
                raw=raw, threshold=0.6, label=VerdictLabel.REFUTED, downgraded=False
            )

    def test_kept_below_threshold_rejected(self):
        raw = make_raw((0.5, 0.3, 0.2))
        with pytest.raises(ValueError):
            CalibratedVerdict(
                raw=raw, threshold=0.6, label=VerdictLabel.SUPPORTED, downgraded=False
            )

    def test_downgrade_at_or_above_threshold_rejected(self):
        raw = make_raw((0.7, 0.2, 0.1))
        with pytest.raises(ValueError):
            CalibratedVerdict(
                raw=raw,
                threshold=0.6,
                label=VerdictLabel.NOT_ENOUGH_INFO,
                downgraded=True,
            )


class TestPiecewiseRuleProperties:
    """Randomized suite over (label, confidence, threshold) triples; the
    acceptance gate re-runs this at scale."""

    def test_rule_matches_oracle_on_1000_triples(self):
        rng = random.Random(42)
        for _ in range(1000):
            raw = random_raw(rng)
            threshold = rng.choice([0.0, rng.random(), raw.confidence, 1.0])
            verdict = recalibrate(raw, threshold)
            expected = oracle_recalibrate(raw.label.value, raw.confidence, threshold)
            assert verdict.label.value == expected
            assert verdict.downgraded == (raw.confidence < threshold)

    def test_downgrade_only_ever_yields_nei(self):
        rng = random.Random(43)
        for _ in range(500):
            raw = random_raw(rng)
            verdict = recalibrate(raw, rng.random())
            if raw.confidence < verdict.threshold:
                assert verdict.label is VerdictLabel.NOT_ENOUGH_INFO
            else:
                assert verdict.label is raw.label

    def test_monotonicity_in_threshold(self):
        # Raising the threshold can only move labels toward NOT_ENOUGH_INFO.
        rng = random.Random(44)
        for _ in range(500):
            raw = random_raw(rng)
            low, high = sorted([rng.random(), rng.random()])
            at_low = recalibrate(raw, low)
            at_high = recalibrate(raw, high)
            if at_low.downgraded:
                assert at_high.downgraded
            if not at_high.downgraded:
                assert not at_low.downgraded

    def test_idempotence(self):
        rng = random.Random(45)
        for _ in range(500):
            raw = random_raw(rng)
            threshold = rng.random()
            once = recalibrate(raw, threshold)
            twice = recalibrate(once.as_raw(), threshold)
            assert twice.label is once.label

    def test_threshold_zero_is_identity(self):
        rng = random.Random(46)
        for _ in range(500):
            raw = random_raw(rng)
            verdict = recalibrate(raw, 0.0)
            assert verdict.label is raw.label
            assert not verdict.downgraded

    def test_threshold_one_keeps_only_total_certainty(self):
        raw = make_raw((1.0, 0.0, 0.0))
        assert not recalibrate(raw, 1.0).downgraded
        almost = make_raw((0.999999, 0.000001, 0.0))
        assert recalibrate(almost, 1.0).downgraded


class TestEffectiveProbs:
    def test_kept_verdict_contributes_raw_vector(self):
        raw = make_raw((0.7, 0.2, 0.1))
        verdict = recalibrate(raw, 0.6)
        assert verdict.effective_probs() == raw.probs
        assert verdict.confidence == 0.7

    def test_downgraded_verdict_contributes_one_hot_nei(self):
        raw = make_raw((0.5, 0.3, 0.2))
        verdict = recalibrate(raw, 0.6)
        assert verdict.effective_probs() == ProbabilityVector.one_hot(
            VerdictLabel.NOT_ENOUGH_INFO
        )
        assert verdict.confidence == 1.0

    def test_as_raw_preserves_ids_and_truncation(self):
        raw = make_raw((0.5, 0.3, 0.2), claim_id="cX", evidence_id="cX/e3", truncated=True)
        reraw = recalibrate(raw, 0.9).as_raw()
        assert reraw.claim_id == "cX"
        assert reraw.evidence_id == "cX/e3"
        assert reraw.truncated
