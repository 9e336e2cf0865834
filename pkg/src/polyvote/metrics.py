"""Scoring: confusion matrix, per-class precision/recall/F1, macro F1.

Macro F1 is the unweighted mean of the three per-class F1 values over the
fixed class set {0, 1, 2}, whether or not a class occurs in the data.
Zero denominators yield 0 for precision, recall, and F1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import LABELS, NUM_CLASSES, Label


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ConfusionMatrix:
    """3x3 count grid: rows = gold class, columns = predicted class."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        if self.counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ValueError(f"confusion matrix must be 3x3, got {self.counts.shape}")
        if np.any(self.counts < 0):
            raise ValueError("confusion counts must be non-negative")
        self.counts.flags.writeable = False

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class EvalReport:
    confusion: ConfusionMatrix
    per_class: dict[Label, ClassScores]
    macro_f1: float
    accuracy: float
    n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_class": {
                str(int(lab)): {
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for lab, s in self.per_class.items()
            },
            "confusion": self.confusion.counts.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def confusion_from_pairs(pred: Sequence[int], gold: Sequence[int]) -> ConfusionMatrix:
    pred_arr = np.asarray(pred, dtype=np.int64)
    gold_arr = np.asarray(gold, dtype=np.int64)
    counts = np.bincount(gold_arr * NUM_CLASSES + pred_arr, minlength=NUM_CLASSES**2)
    return ConfusionMatrix(counts=counts.reshape(NUM_CLASSES, NUM_CLASSES))


def _scores_from_confusion(counts: np.ndarray) -> tuple[dict[Label, ClassScores], float]:
    per_class: dict[Label, ClassScores] = {}
    f1_sum = 0.0
    for lab in LABELS:
        c = int(lab)
        tp = float(counts[c, c])
        fp = float(counts[:, c].sum() - counts[c, c])
        fn = float(counts[c, :].sum() - counts[c, c])
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[lab] = ClassScores(precision=precision, recall=recall, f1=f1)
        f1_sum += f1
    return per_class, f1_sum / NUM_CLASSES


def macro_f1_from_arrays(pred: np.ndarray, gold: np.ndarray) -> float:
    """Fast macro F1 for aligned int arrays; used by grid/subset search."""
    counts = np.bincount(gold * NUM_CLASSES + pred, minlength=NUM_CLASSES**2).reshape(
        NUM_CLASSES, NUM_CLASSES
    )
    _, macro = _scores_from_confusion(counts)
    return macro


def evaluate(pred: Sequence[int], gold: Sequence[int]) -> EvalReport:
    """Score aligned prediction/gold label vectors.

    Both vectors must have the same nonzero length; labels outside
    {0, 1, 2} are rejected.
    """
    if len(pred) != len(gold):
        raise ValueError(f"pred and gold lengths differ: {len(pred)} vs {len(gold)}")
    if len(pred) == 0:
        raise ValueError("cannot evaluate zero examples")
    pred_arr = np.asarray([int(p) for p in pred], dtype=np.int64)
    gold_arr = np.asarray([int(g) for g in gold], dtype=np.int64)
    for name, arr in (("pred", pred_arr), ("gold", gold_arr)):
        if arr.min() < 0 or arr.max() >= NUM_CLASSES:
            raise ValueError(f"{name} contains labels outside 0..2")
    confusion = confusion_from_pairs(pred_arr, gold_arr)
    per_class, macro = _scores_from_confusion(confusion.counts)
    accuracy = float(np.trace(confusion.counts)) / len(pred)
    return EvalReport(
        confusion=confusion,
        per_class=per_class,
        macro_f1=macro,
        accuracy=accuracy,
        n=len(pred),
    )


def bootstrap_ci(
    pred: Sequence[int],
    gold: Sequence[int],
    resamples: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """95% percentile-bootstrap interval for macro F1 over example resampling."""
    if len(pred) != len(gold):
        raise ValueError(f"pred and gold lengths differ: {len(pred)} vs {len(gold)}")
    if len(pred) == 0:
        raise ValueError("cannot evaluate zero examples")
    pred_arr = np.asarray([int(p) for p in pred], dtype=np.int64)
    gold_arr = np.asarray([int(g) for g in gold], dtype=np.int64)
    n = len(pred_arr)
    rng = np.random.default_rng(seed)
    scores = np.empty(resamples, dtype=np.float64)
    for r in range(resamples):
        idx = rng.integers(0, n, size=n)
        scores[r] = macro_f1_from_arrays(pred_arr[idx], gold_arr[idx])
    low, high = np.percentile(scores, [2.5, 97.5])
    return float(low), float(high)


def render_eval_report(report: EvalReport, title: str = "") -> str:
    """Aligned-text rendering: per-class table plus the confusion grid."""
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'class':<18}{'precision':>10}{'recall':>10}{'f1':>10}")
    for lab in LABELS:
        s = report.per_class[lab]
        lines.append(f"{lab.name.lower():<18}{s.precision:>10.4f}{s.recall:>10.4f}{s.f1:>10.4f}")
    lines.append(f"{'macro f1':<18}{'':>10}{'':>10}{report.macro_f1:>10.4f}")
    lines.append(f"{'accuracy':<18}{'':>10}{'':>10}{report.accuracy:>10.4f}")
    lines.append(f"n = {report.n}")
    lines.append("confusion (rows = gold, cols = pred):")
    for row in report.confusion.counts:
        lines.append("  " + "  ".join(f"{int(v):>6d}" for v in row))
    return "\n".join(lines)


def render_results_table(rows: Sequence[tuple[str, str, float]]) -> str:
    """Model / approach / macro-F1 summary table."""
    model_w = max([len("Model")] + [len(r[0]) for r in rows]) + 2
    appr_w = max([len("Approach")] + [len(r[1]) for r in rows]) + 2
    lines = [f"{'Model':<{model_w}}{'Approach':<{appr_w}}{'Macro F1':>9}"]
    lines.append("-" * (model_w + appr_w + 9))
    for model, approach, f1 in rows:
        lines.append(f"{model:<{model_w}}{approach:<{appr_w}}{f1:>9.4f}")
    return "\n".join(lines)
