"""Evaluation metrics: accuracy, confusion counts, false alarm rate."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np


@dataclass
class EvalMetrics:
    accuracy: float
    tp: int
    tn: int
    fp: int
    fn: int
    false_alarm_rate: float
    detection_time_s: float = 0.0
    train_time_s: float = 0.0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[int, int, int, int]:
    """(tp, tn, fp, fn) treating 1 as the attack (positive) class."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    tn = int(((y_true == 0) & (y_pred == 0)).sum())
    fp = int(((y_true == 0) & (y_pred == 1)).sum())
    fn = int(((y_true == 1) & (y_pred == 0)).sum())
    return tp, tn, fp, fn


def metrics_from_predictions(
    y_true: np.ndarray, y_pred: np.ndarray,
    detection_time_s: float = 0.0, train_time_s: float = 0.0,
) -> EvalMetrics:
    tp, tn, fp, fn = confusion_counts(y_true, y_pred)
    total = tp + tn + fp + fn
    accuracy = (tp + tn) / total if total else 0.0
    far = fp / (fp + tn) if (fp + tn) else 0.0
    return EvalMetrics(
        accuracy=accuracy, tp=tp, tn=tn, fp=fp, fn=fn,
        false_alarm_rate=far,
        detection_time_s=detection_time_s, train_time_s=train_time_s,
    )


def evaluate(model, X, y, train_time_s: float = 0.0) -> EvalMetrics:
    """Predict the test set and compute metrics; detection time is wall clock."""
    if len(X) == 0:
        raise ValueError("cannot evaluate on an empty test set")
    started = time.perf_counter()
    predictions = model.predict(X)
    elapsed = time.perf_counter() - started
    return metrics_from_predictions(y, predictions, detection_time_s=elapsed,
                                    train_time_s=train_time_s)


METRICS_HEADER = (
    "model", "train_rows", "test_rows", "train_time_s", "test_time_s",
    "accuracy_pct", "false_alarm_rate",
)


def metrics_csv_row(model_id: str, train_rows: int, test_rows: int,
                    metrics: EvalMetrics) -> list[str]:
    """One report row per (model, dataset, split) in the fixed column order."""
    return [
        model_id,
        str(train_rows),
        str(test_rows),
        f"{metrics.train_time_s:.6f}",
        f"{metrics.detection_time_s:.6f}",
        f"{metrics.accuracy * 100.0:.4f}",
        f"{metrics.false_alarm_rate:.6f}",
    ]
