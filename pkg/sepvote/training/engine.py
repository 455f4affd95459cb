"""Training loop and evaluation."""

import math
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from sepvote.autodiff.rng import Rng
from sepvote.autodiff.tensor import Tape, Tensor, backward
from sepvote.data.batching import Batch, batch_iter
from sepvote.data.dataset import Dataset
from sepvote.errors import DataError
from sepvote.metrics.roc import (
    ConfusionCounts,
    RocCurve,
    RocPoint,
    accuracy_at,
    auc_trapezoid,
    best_accuracy_threshold,
    confusion,
    optimal_cutoff,
    roc_curve,
    scored_samples,
)
from sepvote.models.base import REAL_COLUMN, Detector
from sepvote.segmentation.vote import VoteResult, hard_vote, votes_from_probs
from sepvote.training.adam import AdamState, adam_step, learning_rate
from sepvote.training.checkpoint import save_checkpoint
from sepvote.training.config import TrainConfig
from sepvote.training.loss import summed_cross_entropy
from sepvote.utils.logger import set_logger

DEFAULT_THRESHOLD = 0.5
EPOCH_SEED_BOUND = 2**32

logger = set_logger(__name__)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float | None
    val_auc: float | None
    steps: int
    lr: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "train_acc": self.train_acc,
            "val_acc": self.val_acc,
            "val_auc": self.val_auc,
            "steps": self.steps,
            "lr": self.lr,
        }


@dataclass
class FitResult:
    """
    Outcome of a training session.

    Attributes:
        records: One record per epoch.
        best_epoch: Epoch with the highest (validation AUC, validation accuracy); ties keep the
            earlier epoch, and without a validation split the last epoch wins.
        best_state: Parameters and buffers at `best_epoch`.
        steps: Total Adam steps taken.
    """

    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_state: dict[str, np.ndarray] = field(default_factory=dict)
    steps: int = 0

    @property
    def best_record(self) -> EpochRecord:
        return self.records[self.best_epoch - 1]

    def to_log(self, model: Detector, cfg: TrainConfig) -> dict[str, Any]:
        """JSON-serialisable training log; contains no timestamps so reruns compare equal."""
        return {
            "model": model.describe(),
            "config": cfg.to_dict(),
            "epochs": [r.to_dict() for r in self.records],
            "best_epoch": self.best_epoch,
            "steps": self.steps,
        }


@dataclass
class EvalReport:
    """
    Metrics of a detector on one labelled split.

    `accuracy` and `confusion` come from the hard-voted labels. The ROC analysis, AUC and every
    threshold accuracy use the score, the mean P(real) across voters.
    """

    split: str
    count: int
    accuracy: float
    confusion: ConfusionCounts
    scores: np.ndarray
    labels: np.ndarray
    votes: list[VoteResult]
    auc: float | None = None
    curve: RocCurve | None = None
    cutoff: RocPoint | None = None
    accuracy_at_cutoff: float | None = None
    accuracy_at_default: float | None = None
    best_threshold: float | None = None
    best_accuracy: float | None = None
    threshold: float | None = None
    accuracy_at_threshold: float | None = None

    def to_dict(self) -> dict[str, Any]:
        report: dict[str, Any] = {
            "split": self.split,
            "count": self.count,
            "accuracy": self.accuracy,
            "auc": self.auc,
            "optimal_cutoff": None,
            "confusion": self.confusion.to_dict(),
            "accuracy_at_default_threshold": self.accuracy_at_default,
            "accuracy_at_cutoff": self.accuracy_at_cutoff,
        }
        if self.cutoff is not None:
            report["optimal_cutoff"] = {
                **self.cutoff.to_dict(),
                "threshold": _threshold(self.cutoff.threshold),
            }
        if self.best_threshold is not None:
            report["best_accuracy_threshold"] = {
                "threshold": _threshold(self.best_threshold),
                "accuracy": self.best_accuracy,
            }
        if self.threshold is not None:
            report["threshold"] = self.threshold
            report["accuracy_at_threshold"] = self.accuracy_at_threshold
        return report


def _threshold(value: float) -> float | str:
    return "inf" if math.isinf(value) else value


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _predict(model: Detector, images: np.ndarray, batch_size: int, max_workers: int) -> np.ndarray:
    if max_workers <= 1 or images.shape[0] <= batch_size:
        return model.predict_proba(images, batch_size)
    chunks = [images[i : i + batch_size] for i in range(0, images.shape[0], batch_size)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        parts = list(pool.map(lambda c: model.predict_proba(c, batch_size), chunks))
    return np.concatenate(parts, axis=0)


def evaluate(
    model: Detector,
    dataset: Dataset,
    threshold: float | None = None,
    batch_size: int = 32,
    max_workers: int = 1,
) -> EvalReport:
    """
    Score a split with a frozen model.

    Args:
        model: Detector in inference mode.
        dataset: Labelled split.
        threshold: Optional score threshold to report accuracy at.
        batch_size: Images per forward pass.
        max_workers: Threads used for forward passes.

    Returns:
        The report. AUC and the cutoff are None, with a warning, when the split has one class.

    Raises:
        DataError: The dataset is empty.
    """
    if len(dataset) == 0:
        raise DataError(f"Cannot evaluate on empty split '{dataset.name}'")

    probs = _predict(model, dataset.images, batch_size, max_workers)
    votes = [hard_vote(votes_from_probs(row)) for row in probs]
    scores = np.array([v.score for v in votes], dtype=np.float64)
    labels = dataset.labels
    predicted = np.array([int(v.label) for v in votes], dtype=np.int64)

    voted = confusion(scored_samples(predicted.astype(np.float64), labels), DEFAULT_THRESHOLD)
    samples = scored_samples(scores, labels)
    report = EvalReport(
        split=dataset.name,
        count=len(dataset),
        accuracy=voted.accuracy,
        confusion=voted,
        scores=scores,
        labels=labels,
        votes=votes,
        accuracy_at_default=accuracy_at(samples, DEFAULT_THRESHOLD),
    )

    counts = dataset.class_counts()
    if counts[0] and counts[1]:
        report.curve = roc_curve(samples)
        report.auc = auc_trapezoid(report.curve)
        report.cutoff = optimal_cutoff(report.curve)
        report.accuracy_at_cutoff = accuracy_at(samples, report.cutoff.threshold)
        report.best_threshold, report.best_accuracy = best_accuracy_threshold(samples)
    else:
        logger.warning(
            f"Split '{dataset.name}' holds a single class ({counts[1]} real, {counts[0]} fake); "
            "AUC is undefined"
        )

    if threshold is not None:
        report.threshold = threshold
        report.accuracy_at_threshold = accuracy_at(samples, threshold)
    return report


class Trainer:
    """
    Adam training of a detector with the summed per-head cross-entropy.

    The session is single-threaded: batches are assembled, forwarded, differentiated and applied
    in a fixed order, so (seed, data, config) fix the log bit for bit. Each epoch's shuffle seed
    is drawn from the session generator `rng`, whose state is stored with every checkpoint.
    """

    def __init__(
        self,
        model: Detector,
        cfg: TrainConfig,
        checkpoint_path: str | Path | None = None,
        eval_workers: int = 1,
        rng: Rng | None = None,
    ) -> None:
        self.logger = set_logger(self.__class__.__name__)
        self.model = model
        self.cfg = cfg
        self.checkpoint_path = Path(checkpoint_path) if checkpoint_path else None
        self.eval_workers = eval_workers
        self.state = AdamState()
        self.rng = rng or Rng(cfg.seed)

    def next_epoch_seed(self) -> int:
        """Draw the next shuffle seed from the session generator."""
        return int(self.rng.integers(0, EPOCH_SEED_BOUND))

    def epoch_batches(self, train: Dataset, epoch: int, seed: int | None = None) -> Iterator[Batch]:
        """
        `batch_iter` order, with a trailing single-sample batch folded into the one before it.

        Batch norm cannot normalise a 1x1 map over a single sample. `seed` defaults to the
        config seed.
        """
        seed = self.cfg.seed if seed is None else seed
        pending: Batch | None = None
        for batch in batch_iter(train, self.cfg.batch_size, seed, epoch):
            if pending is not None and len(batch) == 1:
                idx = np.array(pending.indices + batch.indices, dtype=np.int64)
                pending = Batch(train.images[idx], train.labels[idx], tuple(int(i) for i in idx))
                continue
            if pending is not None:
                yield pending
            pending = batch
        if pending is not None:
            yield pending

    def train_step(self, batch: Batch) -> tuple[float, int]:
        """
        One forward/backward pass and Adam update.

        Returns:
            Batch loss and the number of correctly voted samples before the update.
        """
        params = self.model.named_parameters()
        with Tape() as tape:
            x = Tensor(batch.images, dtype=self.model.dtype)
            probs = self.model.forward(x, training=True)
            loss = summed_cross_entropy(probs, batch.labels)
        leaf_grads = backward(tape, loss)
        grads = {
            name: leaf_grads[p.id].data if p.id in leaf_grads else np.zeros_like(p.data)
            for name, p in params.items()
        }
        adam_step(params, grads, self.state, self.cfg)

        stacked = np.stack([p.data[:, REAL_COLUMN] for p in probs], axis=1)
        correct = sum(
            int(hard_vote(votes_from_probs(row)).label) == int(y)
            for row, y in zip(stacked, batch.labels, strict=True)
        )
        return loss.item(), correct

    def fit(self, train: Dataset, val: Dataset | None = None) -> FitResult:
        """
        Train for `cfg.epochs` epochs, validating after each.

        After the Adam steps of an epoch the batchnorm statistics are recomputed over the
        training set, so validation and checkpoints see statistics of the current weights. The
        best epoch by validation AUC (then accuracy) is kept in the result and, when a
        checkpoint path is set, written there.

        Raises:
            DataError: The training set has fewer than two samples.
        """
        if len(train) < 2:
            raise DataError(f"Training needs at least 2 samples, got {len(train)}")

        result = FitResult()
        best_key = (-math.inf, -math.inf)
        self.logger.info(
            f"Training {self.model!r} on {len(train)} samples for {self.cfg.epochs} epochs "
            f"(batch {self.cfg.batch_size}, lr {self.cfg.lr})"
        )

        for epoch in range(1, self.cfg.epochs + 1):
            losses: list[float] = []
            correct = 0
            steps = 0
            for batch in self.epoch_batches(train, epoch, self.next_epoch_seed()):
                loss, hits = self.train_step(batch)
                losses.append(loss * len(batch))
                correct += hits
                steps += 1
            result.steps += steps
            self.model.recalibrate_batchnorm(train.images, self.cfg.batch_size)

            val_acc = val_auc = None
            if val is not None and len(val):
                report = evaluate(self.model, val, max_workers=self.eval_workers)
                val_acc, val_auc = report.accuracy, report.auc

            record = EpochRecord(
                epoch=epoch,
                train_loss=math.fsum(losses) / len(train),
                train_acc=correct / len(train),
                val_acc=val_acc,
                val_auc=val_auc,
                steps=steps,
                lr=learning_rate(self.cfg, self.state.t),
            )
            result.records.append(record)
            self.logger.info(
                f"Epoch {epoch}/{self.cfg.epochs}: loss={record.train_loss:.6f} "
                f"train_acc={record.train_acc:.4f} val_acc={_fmt(val_acc)} val_auc={_fmt(val_auc)}"
            )

            key = (
                val_auc if val_auc is not None else -math.inf,
                val_acc if val_acc is not None else -math.inf,
            )
            if key > best_key or result.best_epoch == 0 or val is None:
                best_key = key
                result.best_epoch = epoch
                result.best_state = self.model.state_dict()
                if self.checkpoint_path is not None:
                    save_checkpoint(
                        self.checkpoint_path, self.model, self.cfg, epoch, rng=self.rng
                    )

        self.logger.info(f"Best epoch {result.best_epoch}: val_auc={_fmt(result.best_record.val_auc)}")
        return result


def fit(
    model: Detector,
    train: Dataset,
    val: Dataset | None,
    cfg: TrainConfig,
    checkpoint_path: str | Path | None = None,
) -> FitResult:
    """Train `model` in place; see `Trainer.fit`."""
    return Trainer(model, cfg, checkpoint_path).fit(train, val)
