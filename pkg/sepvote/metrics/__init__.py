"""Binary classification metrics: confusion counts, ROC curves, AUC and cutoffs."""

from sepvote.metrics.roc import (
    ConfusionCounts,
    RocCurve,
    RocPoint,
    ScoredSample,
    accuracy_at,
    auc_pair_count,
    auc_trapezoid,
    best_accuracy_threshold,
    confusion,
    cutoff_distance,
    optimal_cutoff,
    read_roc_csv,
    roc_curve,
    scored_samples,
    tpr_fpr,
    write_roc_csv,
)

__all__ = [
    "ConfusionCounts",
    "RocCurve",
    "RocPoint",
    "ScoredSample",
    "accuracy_at",
    "auc_pair_count",
    "auc_trapezoid",
    "best_accuracy_threshold",
    "confusion",
    "cutoff_distance",
    "optimal_cutoff",
    "read_roc_csv",
    "roc_curve",
    "scored_samples",
    "tpr_fpr",
    "write_roc_csv",
]
