"""Evaluation mathematics for classifiers.

Confusion matrices (rows = true class, columns = predicted class),
per-class precision/recall/F1 with support-weighted averages, ROC
curves with trapezoidal AUC, and a majority-class baseline. Zero
denominators never produce NaN: the affected value is reported as 0.0
with a per-class ``degenerate`` flag so reports stay machine-readable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import InputError
from .nn import PROB_FLOOR

__all__ = [
    "ClassMetrics",
    "MetricsReport",
    "RocCurve",
    "build_report",
    "confusion_matrix",
    "majority_baseline",
    "precision_recall_f1",
    "report_to_dict",
    "roc_auc",
    "write_confusion_csv",
    "write_report_json",
    "write_roc_csv",
]


@dataclass(frozen=True)
class ClassMetrics:
    """Precision/recall/F1 and support for one class.

    ``degenerate`` is True when any denominator (predicted count,
    true count, or P+R) was zero and the value was forced to 0.0.
    """

    precision: float
    recall: float
    f1: float
    support: int
    degenerate: bool


def confusion_matrix(y_true, y_pred, n_classes):
    """Count (true, predicted) pairs into an n_classes x n_classes grid."""
    if n_classes < 1:
        raise ValueError(f"n_classes must be >= 1, got {n_classes}")
    if len(y_true) != len(y_pred):
        raise ValueError(
            f"label length mismatch: {len(y_true)} true vs {len(y_pred)} predicted"
        )
    if not y_true:
        raise InputError("cannot build a confusion matrix from an empty split")
    counts = [[0] * n_classes for _ in range(n_classes)]
    for t, p in zip(y_true, y_pred):
        if not 0 <= t < n_classes:
            raise ValueError(f"true label {t} outside [0, {n_classes})")
        if not 0 <= p < n_classes:
            raise ValueError(f"predicted label {p} outside [0, {n_classes})")
        counts[t][p] += 1
    return tuple(tuple(row) for row in counts)


def _check_square(matrix):
    n = len(matrix)
    if n == 0:
        raise ValueError("confusion matrix must be non-empty")
    for row in matrix:
        if len(row) != n:
            raise ValueError(
                f"confusion matrix must be square, got row of length {len(row)} in {n}x{n}"
            )
        for cell in row:
            if cell < 0 or cell != int(cell):
                raise ValueError(f"confusion matrix entries must be nonnegative integers, got {cell!r}")
    return n


def precision_recall_f1(matrix):
    """Per-class metrics plus support-weighted averages from a confusion matrix.

    precision_c = M[c,c] / column-sum_c, recall_c = M[c,c] / row-sum_c,
    F1 = 2PR / (P + R). Returns (per_class, weighted) where weighted is a
    (precision, recall, f1) triple weighted by row supports.
    """
    n = _check_square(matrix)
    total = sum(sum(row) for row in matrix)
    if total == 0:
        raise ValueError("confusion matrix has no observations")
    per_class = []
    for c in range(n):
        tp = matrix[c][c]
        col_sum = sum(matrix[r][c] for r in range(n))
        row_sum = sum(matrix[c])
        degenerate = col_sum == 0 or row_sum == 0
        precision = tp / col_sum if col_sum else 0.0
        recall = tp / row_sum if row_sum else 0.0
        if precision + recall > 0:
            f1 = 2.0 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
            degenerate = True
        per_class.append(
            ClassMetrics(
                precision=precision,
                recall=recall,
                f1=f1,
                support=row_sum,
                degenerate=degenerate,
            )
        )
    weighted = tuple(
        sum(getattr(m, field) * m.support for m in per_class) / total
        for field in ("precision", "recall", "f1")
    )
    return tuple(per_class), weighted


@dataclass(frozen=True)
class MetricsReport:
    """Full evaluation summary for one classifier on one split."""

    class_names: tuple
    per_class: tuple
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    mean_loss: float
    confusion: tuple

    def __post_init__(self):
        n = _check_square(self.confusion)
        if len(self.class_names) != n or len(self.per_class) != n:
            raise ValueError(
                f"expected {n} class names and metric rows, got "
                f"{len(self.class_names)} and {len(self.per_class)}"
            )
        total = self.total
        if sum(m.support for m in self.per_class) != total:
            raise ValueError("per-class supports must sum to the confusion-matrix total")
        trace = sum(self.confusion[i][i] for i in range(n))
        if abs(self.accuracy - trace / total) > 1e-12:
            raise ValueError("accuracy must equal trace/total of the confusion matrix")

    @property
    def total(self):
        return sum(sum(row) for row in self.confusion)


def build_report(confusion, class_names, mean_loss):
    """Assemble a MetricsReport from a confusion matrix and a mean loss."""
    n = _check_square(confusion)
    if len(class_names) != n:
        raise ValueError(f"expected {n} class names, got {len(class_names)}")
    per_class, weighted = precision_recall_f1(confusion)
    total = sum(sum(row) for row in confusion)
    trace = sum(confusion[i][i] for i in range(n))
    return MetricsReport(
        class_names=tuple(class_names),
        per_class=per_class,
        weighted_precision=weighted[0],
        weighted_recall=weighted[1],
        weighted_f1=weighted[2],
        accuracy=trace / total,
        mean_loss=float(mean_loss),
        confusion=confusion,
    )


@dataclass(frozen=True)
class RocCurve:
    """Ordered (false-positive-rate, true-positive-rate) points and their AUC."""

    points: tuple
    auc: float

    def __post_init__(self):
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise ValueError("ROC curve must run from (0, 0) to (1, 1)")
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            if x1 < x0 or y1 < y0:
                raise ValueError("ROC points must be nondecreasing in both coordinates")
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError(f"AUC must lie in [0, 1], got {self.auc}")


def roc_auc(labels, scores):
    """Threshold-sweep ROC curve with trapezoidal AUC.

    ``labels`` are 0/1 ints, ``scores`` the positive-class probabilities.
    Equal scores are grouped into a single threshold step, which makes the
    trapezoidal area equal the pairwise-ordering statistic with ties
    counted one half.
    """
    if len(labels) != len(scores):
        raise ValueError(
            f"label length mismatch: {len(labels)} labels vs {len(scores)} scores"
        )
    n_pos = 0
    n_neg = 0
    for label in labels:
        if label == 1:
            n_pos += 1
        elif label == 0:
            n_neg += 1
        else:
            raise ValueError(f"binary labels must be 0 or 1, got {label!r}")
    if n_pos == 0 or n_neg == 0:
        raise InputError(
            "ROC needs at least one positive and one negative example, "
            f"got {n_pos} positive and {n_neg} negative"
        )
    for s in scores:
        if not math.isfinite(s):
            raise ValueError(f"scores must be finite, got {s!r}")
    ranked = sorted(zip(scores, labels), key=lambda pair: -pair[0])
    points = [(0.0, 0.0)]
    tp = 0
    fp = 0
    i = 0
    while i < len(ranked):
        j = i
        while j < len(ranked) and ranked[j][0] == ranked[i][0]:
            if ranked[j][1] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        i = j
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return RocCurve(points=tuple(points), auc=auc)


def majority_baseline(train_labels, eval_labels, n_classes, class_names=None):
    """Score the constant classifier that predicts the training modal class.

    Ties on the mode break toward the smallest class index. The baseline's
    mean loss is the cross-entropy of the training-split class frequencies
    (floored to avoid log of zero) against the evaluation labels.
    """
    if not train_labels:
        raise InputError("majority baseline needs a nonempty training split")
    if not eval_labels:
        raise InputError("majority baseline needs a nonempty evaluation split")
    train_counts = [0] * n_classes
    for label in train_labels:
        if not 0 <= label < n_classes:
            raise ValueError(f"training label {label} outside [0, {n_classes})")
        train_counts[label] += 1
    mode = max(range(n_classes), key=lambda c: (train_counts[c], -c))
    n_train = len(train_labels)
    loss = 0.0
    for label in eval_labels:
        if not 0 <= label < n_classes:
            raise ValueError(f"evaluation label {label} outside [0, {n_classes})")
        prob = max(train_counts[label] / n_train, PROB_FLOOR)
        loss -= math.log(prob)
    confusion = confusion_matrix(eval_labels, [mode] * len(eval_labels), n_classes)
    if class_names is None:
        class_names = tuple(f"class_{c}" for c in range(n_classes))
    return build_report(confusion, class_names, loss / len(eval_labels))


def report_to_dict(report):
    """Plain-dict form of a MetricsReport, ready for JSON dumping."""
    return {
        "accuracy": report.accuracy,
        "mean_loss": report.mean_loss,
        "total": report.total,
        "classes": [
            {
                "name": name,
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
                "degenerate": m.degenerate,
            }
            for name, m in zip(report.class_names, report.per_class)
        ],
        "weighted": {
            "precision": report.weighted_precision,
            "recall": report.weighted_recall,
            "f1": report.weighted_f1,
        },
        "confusion": [list(row) for row in report.confusion],
    }


def write_report_json(report, path, extra=None):
    """Write a MetricsReport as deterministic JSON, with optional extra keys."""
    payload = report_to_dict(report)
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_confusion_csv(report, path):
    """Write the confusion matrix as CSV with labeled true/predicted axes."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(["true\\predicted", *report.class_names]) + "\n")
        for name, row in zip(report.class_names, report.confusion):
            fh.write(",".join([name, *(str(c) for c in row)]) + "\n")


def write_roc_csv(curve, path):
    """Write ROC points as CSV (one row per threshold step)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("false_positive_rate,true_positive_rate\n")
        for x, y in curve.points:
            fh.write(f"{x!r},{y!r}\n")
