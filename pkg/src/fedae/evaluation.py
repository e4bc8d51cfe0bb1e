"""Confusion matrices, classification metrics, and the sample-weighted
server accuracy across clients.

Zero denominators yield 0 rather than NaN so every report serializes. For
two classes the aggregate metrics are the positive-class (label 1) values;
for more classes they are unweighted macro means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionMatrix:
    """counts[i][j] = samples with true class i predicted as class j."""

    counts: np.ndarray

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.counts)) / total if total else 0.0


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: list[ClassMetrics]


def confusion(y_true, y_pred, k: int) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("label vectors must be 1-D and equal length")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"{name} contains labels outside 0..{k - 1}")
    counts = np.bincount(y_true * k + y_pred, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts=counts.astype(np.int64))


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def metrics(cm: ConfusionMatrix) -> MetricSet:
    counts = cm.counts
    k = cm.k
    per_class = []
    for c in range(k):
        tp = float(counts[c, c])
        fp = float(counts[:, c].sum() - counts[c, c])
        fn = float(counts[c, :].sum() - counts[c, c])
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2.0 * precision * recall, precision + recall)
        per_class.append(ClassMetrics(precision=precision, recall=recall, f1=f1))

    if k == 2:
        agg = per_class[1]
        precision, recall, f1 = agg.precision, agg.recall, agg.f1
    else:
        precision = float(np.mean([m.precision for m in per_class]))
        recall = float(np.mean([m.recall for m in per_class]))
        f1 = float(np.mean([m.f1 for m in per_class]))
    return MetricSet(
        accuracy=cm.accuracy, precision=precision, recall=recall, f1=f1, per_class=per_class
    )


def server_accuracy(test_sizes, accuracies) -> float:
    """Sum over clients of (test_size_c / total size) * accuracy_c."""
    sizes = np.asarray(test_sizes, dtype=np.float64)
    accs = np.asarray(accuracies, dtype=np.float64)
    if sizes.ndim != 1 or sizes.shape != accs.shape:
        raise ValueError("test_sizes and accuracies must be 1-D and equal length")
    if sizes.size == 0:
        raise ValueError("server_accuracy needs at least one client")
    if np.any(sizes <= 0):
        raise ValueError("test sizes must be positive")
    if np.any((accs < 0) | (accs > 1)):
        raise ValueError("accuracies must lie in [0, 1]")
    return float(np.dot(sizes / sizes.sum(), accs))
