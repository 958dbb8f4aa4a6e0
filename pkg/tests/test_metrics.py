import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sadf.models import (
    GaussianNaiveBayes,
    confusion_counts,
    evaluate,
    metrics_csv_row,
    metrics_from_predictions,
    train_per_category,
)


class TestConfusion:
    def test_all_correct(self):
        y = np.array([0, 1, 0, 1])
        m = metrics_from_predictions(y, y)
        assert m.accuracy == 1.0
        assert m.fp == 0 and m.fn == 0
        assert m.false_alarm_rate == 0.0

    def test_constant_normal_on_70_30(self):
        y = np.array([0] * 70 + [1] * 30)
        m = metrics_from_predictions(y, np.zeros(100, dtype=np.int64))
        assert m.accuracy == pytest.approx(0.7)
        assert m.false_alarm_rate == 0.0
        assert m.fn == 30

    def test_constant_attack_false_alarm_rate(self):
        y = np.array([0] * 70 + [1] * 30)
        m = metrics_from_predictions(y, np.ones(100, dtype=np.int64))
        assert m.false_alarm_rate == pytest.approx(1.0)
        assert m.accuracy == pytest.approx(0.3)

    def test_counts_by_quadrant(self):
        y_true = np.array([1, 1, 0, 0, 1, 0])
        y_pred = np.array([1, 0, 1, 0, 1, 0])
        assert confusion_counts(y_true, y_pred) == (2, 2, 1, 1)


@settings(max_examples=50, deadline=None)
@given(
    y_true=st.lists(st.integers(0, 1), min_size=1, max_size=200),
    seed=st.integers(0, 1000),
)
def test_confusion_always_sums_to_test_size(y_true, seed):
    y_true = np.array(y_true, dtype=np.int64)
    y_pred = np.random.default_rng(seed).integers(0, 2, size=len(y_true))
    m = metrics_from_predictions(y_true, y_pred)
    assert m.total == len(y_true)
    assert m.accuracy == pytest.approx((m.tp + m.tn) / m.total)


class TestEvaluate:
    def test_times_are_recorded(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(100, 3))
        y = (X[:, 0] > 0).astype(np.int64)
        model = GaussianNaiveBayes().fit(X, y)
        m = evaluate(model, X, y, train_time_s=1.25)
        assert m.detection_time_s > 0.0
        assert m.train_time_s == 1.25

    def test_empty_test_set_rejected(self):
        model = GaussianNaiveBayes().fit(np.zeros((2, 1)), np.array([0, 1]))
        with pytest.raises(ValueError):
            evaluate(model, np.zeros((0, 1)), np.zeros(0, dtype=np.int64))


class TestMetricsRow:
    def test_column_layout(self):
        y = np.array([0, 1])
        m = metrics_from_predictions(y, y, detection_time_s=0.5, train_time_s=2.0)
        row = metrics_csv_row("dt", 100, 2, m)
        assert row[0] == "dt"
        assert row[1] == "100" and row[2] == "2"
        assert row[5] == "100.0000"  # accuracy percent
        assert len(row) == 7


class TestPerCategory:
    def test_one_model_per_category(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(60, 2))
        X[:20, 0] += 4.0
        X[20:40, 1] += 4.0
        categories = np.array(["DoS"] * 20 + ["Worms"] * 20 + [""] * 20, dtype=object)
        models = train_per_category(X, categories, GaussianNaiveBayes)
        assert sorted(models) == ["DoS", "Worms"]
        dos_hits = models["DoS"].predict(X[:20])
        assert dos_hits.mean() > 0.8
