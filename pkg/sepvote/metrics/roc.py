"""
Confusion counts, ROC curves, AUC and cutoff selection.

REAL (label 1) is the positive class and scores are P(real). A sample is predicted positive when
its score is at least the threshold.
"""

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sepvote.errors import ShapeError


@dataclass(frozen=True)
class ScoredSample:
    score: float
    label: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ShapeError(f"Score must be finite, got {self.score}")
        if self.label not in (0, 1):
            raise ShapeError(f"Label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def to_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class RocPoint:
    """
    One operating point. `tp` and `fp` are the raw counts behind the rates, which makes
    distance comparisons exact.
    """

    threshold: float
    fpr: float
    tpr: float
    tp: int
    fp: int

    def to_dict(self) -> dict[str, float]:
        return {"threshold": self.threshold, "fpr": self.fpr, "tpr": self.tpr}


@dataclass(frozen=True)
class RocCurve:
    """
    Operating points from threshold +inf (point (0, 0)) down to the lowest score (point (1, 1)),
    one per distinct score.
    """

    points: tuple[RocPoint, ...]
    positives: int
    negatives: int

    @property
    def fprs(self) -> list[float]:
        return [p.fpr for p in self.points]

    @property
    def tprs(self) -> list[float]:
        return [p.tpr for p in self.points]

    def __len__(self) -> int:
        return len(self.points)


def _arrays(samples: Iterable[ScoredSample]) -> tuple[np.ndarray, np.ndarray]:
    items = list(samples)
    scores = np.array([s.score for s in items], dtype=np.float64)
    labels = np.array([s.label for s in items], dtype=np.int64)
    return scores, labels


def scored_samples(scores: Sequence[float], labels: Sequence[int]) -> list[ScoredSample]:
    """Pair scores with labels.

    Raises:
        ValueError: The sequences differ in length.
    """
    if len(scores) != len(labels):
        raise ShapeError(f"Got {len(scores)} scores for {len(labels)} labels")
    return [ScoredSample(float(s), int(y)) for s, y in zip(scores, labels, strict=True)]


def confusion(samples: Iterable[ScoredSample], threshold: float) -> ConfusionCounts:
    scores, labels = _arrays(samples)
    predicted = scores >= threshold
    positive = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(predicted & positive)),
        fp=int(np.sum(predicted & ~positive)),
        tn=int(np.sum(~predicted & ~positive)),
        fn=int(np.sum(~predicted & positive)),
    )


def tpr_fpr(c: ConfusionCounts) -> tuple[float | None, float | None]:
    """
    True- and false-positive rates; a rate whose class is empty is None.

    Raises:
        ValueError: Both classes are empty.
    """
    if c.total == 0:
        raise ShapeError("Cannot compute rates from an empty confusion matrix")
    tpr = c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    fpr = c.fp / (c.fp + c.tn) if c.fp + c.tn else None
    return tpr, fpr


def accuracy_at(samples: Iterable[ScoredSample], threshold: float) -> float:
    return confusion(samples, threshold).accuracy


def _require_both_classes(labels: np.ndarray) -> tuple[int, int]:
    positives = int(np.sum(labels == 1))
    negatives = int(labels.size - positives)
    if positives == 0 or negatives == 0:
        raise ShapeError(
            f"ROC analysis needs both classes, got {positives} positive and {negatives} negative"
        )
    return positives, negatives


def roc_curve(samples: Iterable[ScoredSample]) -> RocCurve:
    """
    Sweep the threshold over every distinct score.

    Raises:
        ValueError: Only one class is present.
    """
    scores, labels = _arrays(samples)
    positives, negatives = _require_both_classes(labels)

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    cum_tp = np.cumsum(labels[order] == 1)
    cum_fp = np.cumsum(labels[order] == 0)
    # Last index of each run of equal scores.
    last = np.flatnonzero(np.append(sorted_scores[1:] != sorted_scores[:-1], True))

    points = [RocPoint(math.inf, 0.0, 0.0, 0, 0)]
    for i in last:
        tp, fp = int(cum_tp[i]), int(cum_fp[i])
        points.append(RocPoint(float(sorted_scores[i]), fp / negatives, tp / positives, tp, fp))
    return RocCurve(tuple(points), positives, negatives)


def auc_trapezoid(curve: RocCurve) -> float:
    """Trapezoidal area under the curve along the FPR axis."""
    pts = curve.points
    return math.fsum(
        (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0 for a, b in zip(pts[:-1], pts[1:], strict=True)
    )


def auc_pair_count(samples: Iterable[ScoredSample]) -> float:
    """
    Fraction of (positive, negative) pairs ranked correctly, ties counting one half.

    Raises:
        ValueError: Only one class is present.
    """
    scores, labels = _arrays(samples)
    positives, negatives = _require_both_classes(labels)
    pos = scores[labels == 1][:, None]
    neg = scores[labels == 0][None, :]
    greater = int(np.sum(pos > neg))
    ties = int(np.sum(pos == neg))
    return (2 * greater + ties) / (2 * positives * negatives)


def _distance_key(point: RocPoint, curve: RocCurve) -> int:
    # Squared distance to (0, 1) scaled by (P * N)^2, kept in integers.
    p, n = curve.positives, curve.negatives
    return (point.fp * p) ** 2 + ((p - point.tp) * n) ** 2


def cutoff_distance(point: RocPoint) -> float:
    return math.hypot(point.fpr, 1.0 - point.tpr)


def optimal_cutoff(curve: RocCurve) -> RocPoint:
    """
    Point nearest (0, 1). Among equally near points the one with the highest threshold wins.
    """
    best = curve.points[0]
    best_key = _distance_key(best, curve)
    for point in curve.points[1:]:
        key = _distance_key(point, curve)
        if key < best_key:
            best, best_key = point, key
    return best


def best_accuracy_threshold(samples: Iterable[ScoredSample]) -> tuple[float, float]:
    """
    Exhaustive scan for the threshold with the highest accuracy.

    Candidates are +inf and every distinct score, which covers every distinct labelling a
    threshold can produce. Ties go to the higher threshold.

    Returns:
        (threshold, accuracy).
    """
    items = list(samples)
    if not items:
        raise ShapeError("Cannot scan thresholds over an empty sample set")
    candidates = [math.inf] + sorted({s.score for s in items}, reverse=True)
    best = (math.inf, -1.0)
    for threshold in candidates:
        acc = accuracy_at(items, threshold)
        if acc > best[1]:
            best = (threshold, acc)
    return best


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.9g}"


def write_roc_csv(curve: RocCurve, path: str | Path) -> Path:
    """Write `threshold,fpr,tpr` rows, one per point, with 9 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["threshold", "fpr", "tpr"])
        for p in curve.points:
            writer.writerow([_fmt(p.threshold), _fmt(p.fpr), _fmt(p.tpr)])
    return path


def read_roc_csv(path: str | Path) -> list[tuple[float, float, float]]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        return [(float(r["threshold"]), float(r["fpr"]), float(r["tpr"])) for r in reader]
