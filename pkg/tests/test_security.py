import json

import numpy as np
import pytest
from conftest import flip_columns, random_label_matrix

from viewguard import (
    InputError,
    LabelMatrix,
    build_security_report,
    check_condition,
    integrate,
    security_distances,
)
from viewguard.security import render_security_table


def lm(arr):
    return LabelMatrix(np.asarray(arr, dtype=float), "zero_one")


class TestCheckCondition:
    def test_truth_anchor_gives_full_count(self, rng):
        truth = random_label_matrix(rng, 3, 6)
        hats = [random_label_matrix(rng, 3, 6) for _ in range(4)]
        integrated = random_label_matrix(rng, 3, 6)
        assert check_condition(hats, integrated, truth, truth) == 4

    def test_integrated_equal_to_baseline_counts(self, rng):
        truth = random_label_matrix(rng, 2, 5)
        anchor = random_label_matrix(rng, 2, 5)
        hat = random_label_matrix(rng, 2, 5)
        # j with hat_j == Y contributes trace 0, counted as satisfied
        assert check_condition([hat], hat, truth, anchor) == 1

    def test_direct_arithmetic_example(self):
        truth = lm([[1.0], [0.0]])
        anchor = lm([[0.0], [1.0]])
        hat = lm([[1.0], [0.0]])
        integrated = lm([[0.0], [1.0]])
        # trace = 2 > 0, not counted
        assert check_condition([hat], integrated, truth, anchor) == 0

    def test_encoding_mismatch_rejected(self, rng):
        truth = random_label_matrix(rng, 2, 4)
        with pytest.raises(InputError):
            check_condition([truth.to_pm1()], truth, truth, truth)


class TestSecurityDistances:
    def test_perfect_integration(self, rng):
        truth = random_label_matrix(rng, 3, 8)
        hats = [random_label_matrix(rng, 3, 8) for _ in range(2)]
        best_d, int_d, best_a, int_a = security_distances(hats, truth, truth)
        assert int_d == 0.0 and int_a == 1.0

    def test_distance_accuracy_identity(self, rng):
        for _ in range(30):
            t = int(rng.integers(3, 12))
            truth = random_label_matrix(rng, 3, t)
            pred = random_label_matrix(rng, 3, t)
            hats = [random_label_matrix(rng, 3, t)]
            _, int_d, _, int_a = security_distances(hats, pred, truth)
            assert int_a == 1.0 - int_d / (2 * t)

    def test_published_scale_checks(self, rng):
        # distance 20 at t=175 -> accuracy .9429; distance 228 at t=420 -> .7286
        for t, wrong, acc4 in ((175, 10, 0.9429), (420, 114, 0.7286)):
            ids = np.zeros(t, dtype=int)
            truth = LabelMatrix.from_class_ids(ids, 2, "zero_one")
            pred_ids = ids.copy()
            pred_ids[:wrong] = 1
            pred = LabelMatrix.from_class_ids(pred_ids, 2, "zero_one")
            _, int_d, _, int_a = security_distances([truth], pred, truth)
            assert int_d == 2.0 * wrong
            assert round(int_a, 4) == acc4


class TestConditionImpliesSecurityTheorem:
    def test_ball_qualified_implication_never_fails(self, rng):
        # strictly-true form: full count AND hardened Y inside that anchor's
        # ball; holds for arbitrary label matrices by pure algebra
        for _ in range(200):
            c = int(rng.integers(2, 4))
            t = int(rng.integers(3, 9))
            m = int(rng.integers(2, 5))
            truth = random_label_matrix(rng, c, t)
            hats = [random_label_matrix(rng, c, t) for _ in range(m)]
            bars = [random_label_matrix(rng, c, t) for _ in range(m)]
            sol = integrate(hats, bars)
            lhs = float(np.sum((sol.y_hard.values - truth.values) ** 2))
            rhs = min(float(np.sum((h.values - truth.values) ** 2)) for h in hats)
            for k, bar in enumerate(bars):
                if check_condition(hats, sol.y_hard, truth, bar) < m:
                    continue
                ball = float(np.sum((sol.y_hard.values - bar.values) ** 2))
                qk = min(float(np.sum((h.values - bar.values) ** 2)) for h in hats)
                if ball <= qk:
                    assert lhs <= rhs

    def test_operating_regime_consistency(self, rng):
        # pipeline outputs with adapted anchors beating the baselines: the
        # unqualified implication holds throughout
        for _ in range(100):
            c = int(rng.integers(2, 4))
            t = int(rng.integers(6, 13))
            m = int(rng.integers(2, 5))
            truth_ids = rng.integers(0, c, t)
            truth = LabelMatrix.from_class_ids(truth_ids, c, "zero_one")
            hats = [
                LabelMatrix.from_class_ids(
                    flip_columns(rng, truth_ids, rng.integers(2, 5), c), c, "zero_one"
                )
                for _ in range(m)
            ]
            bars = [
                LabelMatrix.from_class_ids(
                    flip_columns(rng, truth_ids, rng.integers(0, 2), c), c, "zero_one"
                )
                for _ in range(m)
            ]
            sol = integrate(hats, bars)
            counts = [check_condition(hats, sol.y_hard, truth, bar) for bar in bars]
            if max(counts) == m:
                lhs = float(np.sum((sol.y_hard.values - truth.values) ** 2))
                rhs = min(float(np.sum((h.values - truth.values) ** 2)) for h in hats)
                assert lhs <= rhs


class TestSecurityReport:
    def test_report_fields_and_serialization(self, rng, tmp_path):
        truth = random_label_matrix(rng, 2, 10)
        hats = [random_label_matrix(rng, 2, 10) for _ in range(3)]
        bars = [random_label_matrix(rng, 2, 10) for _ in range(3)]
        integrated = random_label_matrix(rng, 2, 10)
        report = build_security_report(hats, bars, integrated, truth)
        assert len(report.condition_counts) == 3
        assert all(0 <= cnt <= 3 for cnt in report.condition_counts)
        assert report.max_count == max(report.condition_counts)
        assert report.secure == (report.integrated_distance <= report.best_distance)
        path = tmp_path / "sec.json"
        report.save(str(path))
        loaded = json.loads(path.read_text())
        assert loaded["condition_counts"] == list(report.condition_counts)
        assert loaded["secure"] == report.secure

    def test_render_table(self, rng):
        truth = random_label_matrix(rng, 2, 6)
        report = build_security_report([truth], [truth], truth, truth)
        text = render_security_table(report)
        assert "anchor1" in text and "secure" in text
        assert "yes" in text
