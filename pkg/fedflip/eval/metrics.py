"""Classification metrics: confusion matrix, per-class and averaged scores.

Zero-division convention: a class that is never predicted has precision 0,
a class with no support has recall 0, and F1 is 0 whenever precision and
recall are both 0. Accuracy is trace / total, the multiclass form of
(TP + TN) / total.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from fedflip.errors import MetricsError


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""
    counts: np.ndarray  # [C, C] int64

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class AverageMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClassificationReport:
    per_class: List[ClassMetrics]
    macro_avg: AverageMetrics
    weighted_avg: AverageMetrics
    accuracy: float
    total_support: int


def confusion(preds: Sequence[int], labels: Sequence[int], num_classes: int) -> ConfusionMatrix:
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise MetricsError(
            f"predictions {preds.shape} and labels {labels.shape} must be equal-length vectors"
        )
    for what, values in (("prediction", preds), ("label", labels)):
        if values.size and (values.min() < 0 or values.max() >= num_classes):
            raise MetricsError(f"{what} outside 0..{num_classes - 1}")

    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (labels, preds), 1)
    return ConfusionMatrix(counts)


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros(numerator.shape, dtype=np.float64)
    nonzero = denominator > 0
    out[nonzero] = numerator[nonzero] / denominator[nonzero]
    return out


def report(cm: ConfusionMatrix, class_names: Sequence[str]) -> ClassificationReport:
    """Per-class precision/recall/F1/support plus macro, weighted and accuracy rows."""
    total = cm.total
    if total == 0:
        raise MetricsError("confusion matrix is empty")
    if len(class_names) != cm.num_classes:
        raise MetricsError(f"{cm.num_classes} classes but {len(class_names)} names")

    tp = np.diag(cm.counts).astype(np.float64)
    predicted = cm.counts.sum(axis=0).astype(np.float64)
    support = cm.counts.sum(axis=1)

    precision = _safe_ratio(tp, predicted)
    recall = _safe_ratio(tp, support.astype(np.float64))
    f1 = _safe_ratio(2 * precision * recall, precision + recall)

    per_class = [
        ClassMetrics(str(name), float(p), float(r), float(f), int(s))
        for name, p, r, f, s in zip(class_names, precision, recall, f1, support)
    ]
    macro = AverageMetrics(
        precision=float(np.mean(precision)),
        recall=float(np.mean(recall)),
        f1=float(np.mean(f1)),
    )
    accuracy = float(tp.sum() / total)
    weights = support / total
    weighted = AverageMetrics(
        precision=float(np.dot(weights, precision)),
        # sum_c support_c * TP_c / support_c == trace, so this is the accuracy
        recall=accuracy,
        f1=float(np.dot(weights, f1)),
    )
    return ClassificationReport(per_class, macro, weighted, accuracy, total)
