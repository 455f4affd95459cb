"""Adam training, losses, evaluation and checkpoints."""

from sepvote.training.adam import AdamState, adam_step, learning_rate
from sepvote.training.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    Checkpoint,
    load_checkpoint,
    restore_model,
    save_checkpoint,
)
from sepvote.training.config import TrainConfig
from sepvote.training.engine import EpochRecord, EvalReport, FitResult, Trainer, evaluate, fit
from sepvote.training.loss import cross_entropy, ensemble_loss, summed_cross_entropy

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "AdamState",
    "Checkpoint",
    "EpochRecord",
    "EvalReport",
    "FitResult",
    "TrainConfig",
    "Trainer",
    "adam_step",
    "cross_entropy",
    "ensemble_loss",
    "evaluate",
    "fit",
    "learning_rate",
    "load_checkpoint",
    "restore_model",
    "save_checkpoint",
    "summed_cross_entropy",
]
