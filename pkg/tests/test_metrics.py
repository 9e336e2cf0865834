"""Metric correctness against an independent recount oracle."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyvote.corpus import Label
from polyvote.metrics import (
    bootstrap_ci,
    confusion_from_pairs,
    evaluate,
    macro_f1_from_arrays,
    render_eval_report,
    render_results_table,
)


def oracle_scores(pred, gold):
    """Recount TP/FP/FN per class from scratch, independently of the
    confusion-matrix path."""
    per_class = {}
    f1_values = []
    for c in (0, 1, 2):
        tp = sum(1 for p, g in zip(pred, gold) if p == c and g == c)
        fp = sum(1 for p, g in zip(pred, gold) if p == c and g != c)
        fn = sum(1 for p, g in zip(pred, gold) if p != c and g == c)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[c] = (precision, recall, f1)
        f1_values.append(f1)
    accuracy = sum(1 for p, g in zip(pred, gold) if p == g) / len(pred)
    return per_class, sum(f1_values) / 3, accuracy


class TestEvaluate:
    def test_perfect_prediction(self):
        labels = [0, 1, 2, 1, 0, 2, 2]
        report = evaluate(labels, labels)
        assert report.macro_f1 == 1.0
        assert report.accuracy == 1.0

    def test_hand_fixture(self):
        report = evaluate(pred=[0, 1, 1, 2], gold=[0, 0, 1, 2])
        assert abs(report.per_class[Label(0)].f1 - 2 / 3) < 1e-12
        assert abs(report.per_class[Label(1)].f1 - 2 / 3) < 1e-12
        assert abs(report.per_class[Label(2)].f1 - 1.0) < 1e-12
        assert abs(report.macro_f1 - 7 / 9) < 1e-12

    def test_total_miss(self):
        report = evaluate(pred=[1, 1], gold=[0, 0])
        assert report.macro_f1 == 0.0
        assert all(s.f1 == 0.0 for s in report.per_class.values())

    def test_matches_oracle_on_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(1, 120))
            pred = rng.integers(0, 3, size=n).tolist()
            gold = rng.integers(0, 3, size=n).tolist()
            report = evaluate(pred, gold)
            per_class, macro, accuracy = oracle_scores(pred, gold)
            for c in (0, 1, 2):
                s = report.per_class[Label(c)]
                assert abs(s.precision - per_class[c][0]) <= 1e-12
                assert abs(s.recall - per_class[c][1]) <= 1e-12
                assert abs(s.f1 - per_class[c][2]) <= 1e-12
            assert abs(report.macro_f1 - macro) <= 1e-12
            assert abs(report.accuracy - accuracy) <= 1e-12

    def test_accuracy_is_trace_over_n(self):
        rng = np.random.default_rng(3)
        pred = rng.integers(0, 3, size=200)
        gold = rng.integers(0, 3, size=200)
        report = evaluate(pred.tolist(), gold.tolist())
        assert report.accuracy == np.trace(report.confusion.counts) / 200

    def test_macro_one_iff_diagonal(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pred = rng.integers(0, 3, size=40)
            gold = rng.integers(0, 3, size=40)
            report = evaluate(pred.tolist(), gold.tolist())
            diagonal = np.all(
                report.confusion.counts == np.diag(np.diag(report.confusion.counts))
            )
            assert (report.macro_f1 == 1.0) == bool(diagonal)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=60),
        st.permutations([0, 1, 2]),
    )
    def test_macro_invariant_under_class_permutation(self, pairs, perm):
        pred = [p for p, _ in pairs]
        gold = [g for _, g in pairs]
        base = evaluate(pred, gold).macro_f1
        permuted = evaluate([perm[p] for p in pred], [perm[g] for g in gold]).macro_f1
        assert abs(base - permuted) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate([0, 1], [0])

    def test_zero_length(self):
        with pytest.raises(ValueError):
            evaluate([], [])

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            evaluate([0, 3], [0, 1])

    def test_fast_path_agrees_with_report(self):
        rng = np.random.default_rng(5)
        pred = rng.integers(0, 3, size=500)
        gold = rng.integers(0, 3, size=500)
        assert macro_f1_from_arrays(pred, gold) == evaluate(pred.tolist(), gold.tolist()).macro_f1

    def test_confusion_orientation(self):
        # one gold-0 example predicted as 2 lands in row 0, column 2
        conf = confusion_from_pairs(pred=[2], gold=[0])
        assert conf.counts[0, 2] == 1
        assert conf.counts.sum() == 1


class TestBootstrap:
    def test_perfect_prediction_degenerate_interval(self):
        # large enough that resamples keep all three classes present
        labels = [0, 1, 2] * 50
        low, high = bootstrap_ci(labels, labels, resamples=200, seed=1)
        assert (low, high) == (1.0, 1.0)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        pred = rng.integers(0, 3, size=80).tolist()
        gold = rng.integers(0, 3, size=80).tolist()
        assert bootstrap_ci(pred, gold, seed=42) == bootstrap_ci(pred, gold, seed=42)
        assert bootstrap_ci(pred, gold, seed=42) != bootstrap_ci(pred, gold, seed=43)

    def test_interval_contains_point_estimate(self):
        rng = np.random.default_rng(9)
        for trial in range(100):
            n = int(rng.integers(30, 150))
            gold = rng.integers(0, 3, size=n)
            # correlated predictions so per-resample F1 varies smoothly
            noise = rng.random(n) < 0.25
            pred = np.where(noise, rng.integers(0, 3, size=n), gold)
            point = evaluate(pred.tolist(), gold.tolist()).macro_f1
            low, high = bootstrap_ci(pred.tolist(), gold.tolist(), resamples=400, seed=trial)
            assert low <= point <= high


class TestRendering:
    def test_eval_report_table(self):
        report = evaluate([0, 1, 1, 2], [0, 0, 1, 2])
        text = render_eval_report(report, title="fixture")
        assert "macro f1" in text
        assert "0.7778" in text
        assert "confusion" in text

    def test_results_table(self):
        text = render_results_table(
            [("model-a", "single", 0.791), ("ensemble", "hard voting", 0.782)]
        )
        assert "Model" in text and "Approach" in text and "Macro F1" in text
        assert "0.7910" in text and "0.7820" in text
