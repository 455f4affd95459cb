"""Tests for confusion counts, ROC curves, AUC and cutoff selection."""

import math

import numpy as np
import pytest

from sepvote.autodiff.rng import Rng
from sepvote.errors import ShapeError
from sepvote.metrics.roc import (
    ConfusionCounts,
    ScoredSample,
    accuracy_at,
    auc_pair_count,
    auc_trapezoid,
    best_accuracy_threshold,
    confusion,
    cutoff_distance,
    optimal_cutoff,
    read_roc_csv,
    roc_curve,
    scored_samples,
    tpr_fpr,
    write_roc_csv,
)


def _random_set(rng, n=None):
    """Scores on a coarse grid so ties are common; both classes always present."""
    n = n or int(rng.integers(2, 51))
    labels = [int(x) for x in rng.integers(0, 2, size=n)]
    labels[0], labels[1] = 0, 1
    scores = [float(x) for x in rng.integers(0, 11, size=n) / 10.0]
    return scored_samples(scores, labels)


class TestConfusion:
    """Tests for counting and rates."""

    def test_all_positive_above_threshold(self):
        c = confusion(scored_samples([0.9] * 10, [1] * 10), 0.5)
        assert (c.tp, c.fn) == (10, 0)

    def test_threshold_above_one(self):
        c = confusion(scored_samples([0.2, 0.9, 1.0], [0, 1, 1]), 1.01)
        assert (c.tp, c.fp) == (0, 0)

    def test_threshold_is_inclusive(self):
        c = confusion(scored_samples([0.5, 0.5], [1, 0]), 0.5)
        assert c == ConfusionCounts(tp=1, fp=1, tn=0, fn=0)

    def test_matches_recount(self):
        rng = Rng(7)
        samples = _random_set(rng, 20)
        c = confusion(samples, 0.45)
        assert c.tp == sum(1 for s in samples if s.score >= 0.45 and s.label == 1)
        assert c.fp == sum(1 for s in samples if s.score >= 0.45 and s.label == 0)
        assert c.total == 20

    def test_rates(self):
        assert tpr_fpr(ConfusionCounts(tp=8, fp=0, tn=5, fn=2)) == (0.8, 0.0)
        tpr, fpr = tpr_fpr(ConfusionCounts(tp=3, fp=2, tn=4, fn=1))
        assert tpr == 0.75
        assert fpr == pytest.approx(1 / 3)

    def test_rate_of_missing_class_is_none(self):
        assert tpr_fpr(ConfusionCounts(tp=2, fp=0, tn=0, fn=1))[1] is None
        with pytest.raises(ShapeError):
            tpr_fpr(ConfusionCounts(0, 0, 0, 0))

    def test_accuracy(self):
        assert accuracy_at(scored_samples([0.9, 0.1, 0.6], [1, 0, 0]), 0.5) == pytest.approx(2 / 3)

    def test_sample_validation(self):
        with pytest.raises(ShapeError):
            ScoredSample(math.nan, 1)
        with pytest.raises(ShapeError):
            ScoredSample(0.5, 2)
        with pytest.raises(ShapeError):
            scored_samples([0.1], [0, 1])


class TestRocCurve:
    """Tests for threshold sweeps and AUC."""

    def test_two_points(self):
        curve = roc_curve(scored_samples([0.9, 0.4], [1, 0]))
        assert [(p.fpr, p.tpr) for p in curve.points] == [(0, 0), (0, 1), (1, 1)]
        assert curve.points[0].threshold == math.inf

    def test_identical_scores(self):
        curve = roc_curve(scored_samples([0.3] * 4, [1, 0, 1, 0]))
        assert [(p.fpr, p.tpr) for p in curve.points] == [(0, 0), (1, 1)]

    def test_single_class(self):
        with pytest.raises(ShapeError, match="both classes"):
            roc_curve(scored_samples([0.1, 0.2], [1, 1]))
        with pytest.raises(ShapeError):
            auc_pair_count(scored_samples([0.1, 0.2], [0, 0]))

    def test_monotone_with_fixed_endpoints(self):
        rng = Rng(3)
        for _ in range(100):
            curve = roc_curve(_random_set(rng))
            assert (curve.fprs[0], curve.tprs[0]) == (0.0, 0.0)
            assert (curve.fprs[-1], curve.tprs[-1]) == (1.0, 1.0)
            assert all(np.diff(curve.fprs) >= 0)
            assert all(np.diff(curve.tprs) >= 0)
            assert all(np.diff([p.threshold for p in curve.points]) < 0)

    def test_auc_examples(self):
        perfect = scored_samples([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert auc_trapezoid(roc_curve(perfect)) == 1.0
        assert auc_pair_count(perfect) == 1.0

        tied = scored_samples([0.5] * 4, [1, 0, 1, 0])
        assert auc_trapezoid(roc_curve(tied)) == 0.5
        assert auc_pair_count(tied) == 0.5

        mixed = scored_samples([0.8, 0.3, 0.5, 0.1], [1, 1, 0, 0])
        assert auc_trapezoid(roc_curve(mixed)) == pytest.approx(0.75)
        assert auc_pair_count(mixed) == 0.75

    def test_trapezoid_equals_pair_count(self):
        """1000 random sets with injected ties."""
        rng = Rng(2024)
        for _ in range(1000):
            samples = _random_set(rng)
            assert abs(auc_trapezoid(roc_curve(samples)) - auc_pair_count(samples)) <= 1e-9

    def test_auc_invariances(self):
        rng = Rng(5)
        for _ in range(50):
            samples = _random_set(rng)
            auc = auc_pair_count(samples)
            cubed = [ScoredSample(s.score**3, s.label) for s in samples]
            flipped = [ScoredSample(1.0 - s.score, 1 - s.label) for s in samples]
            negated = [ScoredSample(-s.score, s.label) for s in samples]
            assert auc_pair_count(cubed) == pytest.approx(auc, abs=1e-12)
            assert auc_pair_count(flipped) == pytest.approx(auc, abs=1e-12)
            assert auc_pair_count(negated) == pytest.approx(1.0 - auc, abs=1e-12)


class TestCutoff:
    """Tests for the operating point nearest (0, 1)."""

    def test_perfect_classifier(self):
        curve = roc_curve(scored_samples([0.9, 0.8, 0.2], [1, 1, 0]))
        point = optimal_cutoff(curve)
        assert (point.fpr, point.tpr) == (0.0, 1.0)
        assert point.threshold == 0.8
        assert cutoff_distance(point) == 0.0

    def test_tie_prefers_higher_threshold(self):
        """On the diagonal every corner point is equidistant; the highest threshold wins."""
        curve = roc_curve(scored_samples([0.5] * 2, [1, 0]))
        assert optimal_cutoff(curve).threshold == math.inf

    def test_matches_exhaustive_scan(self):
        rng = Rng(11)
        for _ in range(200):
            curve = roc_curve(_random_set(rng))
            best = min(cutoff_distance(p) for p in curve.points)
            chosen = optimal_cutoff(curve)
            assert cutoff_distance(chosen) == pytest.approx(best, abs=1e-12)
            assert chosen.threshold == max(
                p.threshold for p in curve.points if cutoff_distance(p) <= best + 1e-12
            )

    def test_cutoff_no_farther_than_default_threshold(self):
        """The chosen cutoff is never farther from (0, 1) than the 0.5 operating point."""
        rng = Rng(13)
        for _ in range(200):
            samples = _random_set(rng)
            chosen = optimal_cutoff(roc_curve(samples))
            tpr, fpr = tpr_fpr(confusion(samples, 0.5))
            assert cutoff_distance(chosen) <= math.hypot(fpr, 1.0 - tpr) + 1e-12

    def test_best_accuracy_threshold(self):
        samples = scored_samples([0.9, 0.7, 0.6, 0.4, 0.2], [1, 1, 0, 1, 0])
        threshold, acc = best_accuracy_threshold(samples)
        assert acc == pytest.approx(0.8)
        assert threshold == 0.7
        rng = Rng(17)
        for _ in range(100):
            samples = _random_set(rng)
            _, best = best_accuracy_threshold(samples)
            chosen = optimal_cutoff(roc_curve(samples))
            assert best >= accuracy_at(samples, chosen.threshold)
            assert best >= accuracy_at(samples, 0.5)
        with pytest.raises(ShapeError):
            best_accuracy_threshold([])


class TestRocCsv:
    """Tests for the ROC point file."""

    def test_write_and_read(self, tmp_path):
        curve = roc_curve(scored_samples([0.9, 0.123456789012, 0.2], [1, 0, 0]))
        path = write_roc_csv(curve, tmp_path / "out" / "roc.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "threshold,fpr,tpr"
        assert lines[1] == "inf,0,0"
        assert lines[4].startswith("0.123456789,")
        rows = read_roc_csv(path)
        assert len(rows) == len(curve)
        assert rows[-1][1:] == (1.0, 1.0)
