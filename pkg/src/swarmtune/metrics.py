"""Confusion matrix and per-class precision / recall / F1 plus accuracy."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .results import format_value
from .space import round_half_away


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows = true class, columns = predicted class
    class_names: tuple

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassMetrics:
    class_names: tuple
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    accuracy: float
    undefined: tuple = ()  # (class, metric) pairs that hit 0/0

    @property
    def per_class(self):
        return list(zip(self.precision, self.recall, self.f1))


def confusion_matrix(true_labels, predicted_labels, n_classes: int,
                     class_names: Sequence[str] | None = None) -> ConfusionMatrix:
    t = np.asarray(true_labels)
    p = np.asarray(predicted_labels)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError(f"label vectors must be 1-D and equal length, got {t.shape} and {p.shape}")
    if not (np.issubdtype(t.dtype, np.integer) or t.size == 0) or not (
        np.issubdtype(p.dtype, np.integer) or p.size == 0
    ):
        raise ValueError("labels must be integers")
    for name, labels in (("true", t), ("predicted", p)):
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise ValueError(f"{name} labels must lie in [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (t.astype(np.int64), p.astype(np.int64)), 1)
    if class_names is None:
        class_names = [str(k) for k in range(n_classes)]
    if len(class_names) != n_classes:
        raise ValueError(f"{len(class_names)} class names for {n_classes} classes")
    return ConfusionMatrix(counts, tuple(class_names))


def _ratio(num, den):
    den = np.asarray(den, dtype=float)
    out = np.zeros_like(den)
    np.divide(num, den, out=out, where=den > 0)
    return out


def class_metrics(cm: ConfusionMatrix) -> ClassMetrics:
    """Per-class metrics; any 0/0 is reported as 0 and listed in ``undefined``."""
    counts = np.asarray(cm.counts)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] == 0:
        raise ValueError(f"confusion matrix must be square and non-empty, got {counts.shape}")
    if (counts < 0).any():
        raise ValueError("confusion matrix has negative counts")
    total = counts.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty (no samples)")
    tp = np.diag(counts).astype(float)
    col = counts.sum(axis=0)
    row = counts.sum(axis=1)
    precision = _ratio(tp, col)
    recall = _ratio(tp, row)
    f1 = _ratio(2 * precision * recall, precision + recall)
    undefined = []
    for k, name in enumerate(cm.class_names):
        if col[k] == 0:
            undefined.append((name, "precision"))
        if row[k] == 0:
            undefined.append((name, "recall"))
    return ClassMetrics(tuple(cm.class_names), precision, recall, f1,
                        float(tp.sum() / total), tuple(undefined))


def f1_score(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)


def metrics_csv_text(m: ClassMetrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "precision", "recall", "f1"])
    for name, p, r, f in zip(m.class_names, m.precision, m.recall, m.f1):
        w.writerow([name, format_value(p), format_value(r), format_value(f)])
    w.writerow(["accuracy", format_value(m.accuracy)])
    return buf.getvalue()


def write_metrics_csv(m: ClassMetrics, path) -> None:
    Path(path).write_text(metrics_csv_text(m))


def format_report(m: ClassMetrics, title: str = "") -> str:
    """Two-decimal table: one row per class, accuracy as an integer percentage."""
    width = max([len("Classes")] + [len(n) for n in m.class_names]) + 2
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'Classes':<{width}}{'Precision':>10}{'Recall':>10}{'F1-score':>10}")
    for name, p, r, f in zip(m.class_names, m.precision, m.recall, m.f1):
        lines.append(f"{name:<{width}}{p:>10.2f}{r:>10.2f}{f:>10.2f}")
    lines.append(f"Accuracy: {round_half_away(100 * m.accuracy)}")
    for name, metric in m.undefined:
        lines.append(f"note: {metric} of {name} is undefined (0/0), reported as 0")
    return "\n".join(lines)
