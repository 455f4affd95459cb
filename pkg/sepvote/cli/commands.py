"""Subcommand implementations."""

import json
from abc import ABC, abstractmethod
from argparse import Namespace
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, ClassVar

from sepvote.cli.ablation import (
    BASELINE_ROW,
    AblationReport,
    AblationRow,
    SplitScore,
    merge_reports,
)
from sepvote.cli.validator import Validator
from sepvote.data.dataset import Dataset, load_image, load_split
from sepvote.data.manifest import load_manifest, split_names
from sepvote.data.synth import SynthConfig, generate_synthetic_dataset
from sepvote.errors import DataError, SepvoteError, UsageError
from sepvote.metrics.roc import write_roc_csv
from sepvote.models.ensemble import forward_ensemble
from sepvote.models.profiles import Profile, get_profile
from sepvote.segmentation.scheme import get_scheme
from sepvote.training.checkpoint import load_checkpoint, restore_model
from sepvote.training.config import TrainConfig
from sepvote.training.engine import EvalReport, Trainer, evaluate
from sepvote.utils.logger import set_logger
from sepvote.utils.paths import ensure_directory, resolve_path
from sepvote.utils.registry import architecture_registry


def _write_json(data: dict[str, Any], path: str | Path | None) -> None:
    text = json.dumps(data, indent=2)
    if path is None:
        print(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n")


class Command(ABC):
    """
    One CLI subcommand bound to its parsed arguments.
    """

    name: ClassVar[str] = ""

    def __init__(self, args: Namespace) -> None:
        self.logger = set_logger(self.__class__.__name__)
        self.args = args

    @abstractmethod
    def run(self) -> None:
        """Execute the command; failures raise `SepvoteError` subclasses."""

    def train_config(self) -> TrainConfig:
        """Config file values (or defaults) with command-line overrides applied."""
        base = TrainConfig.from_file(self.args.config) if self.args.config else TrainConfig()
        return base.with_overrides(
            epochs=self.args.epochs,
            batch_size=self.args.batch_size,
            lr=self.args.lr,
            seed=self.args.seed,
            dtype=self.args.dtype,
        )


class SynthCommand(Command):
    name = "synth"

    def run(self) -> None:
        cfg = SynthConfig(
            count=self.args.count,
            size=self.args.size,
            seed=self.args.seed if self.args.seed is not None else 0,
            patch_min=self.args.patch_min,
            patch_max=self.args.patch_max,
            feather=self.args.feather,
            blur=self.args.blur,
            val_fraction=self.args.val_fraction,
            test_fraction=self.args.test_fraction,
            image_format=self.args.format,
        )
        out = resolve_path(self.args.out)
        try:
            result = generate_synthetic_dataset(cfg, out)
        except OSError as err:
            raise DataError(f"Cannot write synthetic dataset to {out}: {err}") from err
        print(f"Wrote {len(result.entries)} images and {result.manifest_path}")


class TrainCommand(Command):
    name = "train"

    def run(self) -> None:
        cfg = self.train_config()
        profile = get_profile(self.args.profile)
        entries = load_manifest(self.args.manifest)
        workers = Validator.worker_count(self.args.max_workers)
        train = load_split(entries, "train", profile.input_size, workers)
        val = load_split(entries, "val", profile.input_size, workers)

        model = architecture_registry.build(
            self.args.arch,
            get_scheme(self.args.scheme),
            profile,
            seed=cfg.seed,
            shared_heads=self.args.shared_heads,
            dtype=cfg.dtype,
        )
        self.logger.info(f"Built {model!r} with {model.parameter_count():,} parameters")

        out = resolve_path(self.args.out)
        result = Trainer(model, cfg, checkpoint_path=out, eval_workers=workers).fit(train, val)
        log_path = resolve_path(self.args.log) if self.args.log else out.with_suffix(".log.json")
        _write_json(result.to_log(model, cfg), log_path)

        best = result.best_record
        print(
            json.dumps(
                {
                    "checkpoint": str(out),
                    "log": str(log_path),
                    "best_epoch": best.epoch,
                    "val_accuracy": best.val_acc,
                    "val_auc": best.val_auc,
                }
            )
        )


class EvalCommand(Command):
    name = "eval"

    def run(self) -> None:
        checkpoint = load_checkpoint(self.args.model, expected_scheme=self.args.scheme)
        model = restore_model(checkpoint)
        entries = load_manifest(self.args.manifest)
        workers = Validator.worker_count(self.args.max_workers)
        dataset = load_split(entries, self.args.split, model.profile.input_size, workers)

        report = evaluate(model, dataset, self.args.threshold, max_workers=workers)
        if self.args.roc_csv and report.curve is not None:
            write_roc_csv(report.curve, resolve_path(self.args.roc_csv))
        elif self.args.roc_csv:
            self.logger.warning("No ROC curve for a single-class split; ROC CSV not written")
        _write_json(report.to_dict(), resolve_path(self.args.report) if self.args.report else None)


class PredictCommand(Command):
    name = "predict"

    def run(self) -> None:
        model = restore_model(load_checkpoint(self.args.model))
        image = load_image(self.args.image, model.profile.input_size)
        result = forward_ensemble(model, image)
        if self.args.json:
            print(json.dumps({"image": str(self.args.image), **result.to_dict()}, indent=2))
        else:
            print(str(result.label))


@dataclass(frozen=True)
class AblationJob:
    row: str
    arch: str
    scheme: str


class AblateCommand(Command):
    """
    Train and evaluate one model per scheme with a shared seed and config.

    Schemes may run in parallel as independent sessions; a failing scheme is recorded in its
    row and the remaining schemes still run.
    """

    name = "ablate"

    def jobs(self) -> list[AblationJob]:
        jobs = [AblationJob(s, self.args.arch, s) for s in self.args.schemes]
        if self.args.baseline:
            jobs.insert(0, AblationJob(BASELINE_ROW, "mesonet", "ori"))
        return jobs

    def run_job(
        self,
        job: AblationJob,
        cfg: TrainConfig,
        profile: Profile,
        train: Dataset,
        val: Dataset,
        evals: dict[str, Dataset],
        out_dir: Path,
    ) -> AblationRow:
        row = AblationRow(run_id=self.args.run_id, scheme=job.row, arch=job.arch)
        try:
            model = architecture_registry.build(
                job.arch,
                get_scheme(job.scheme),
                profile,
                seed=cfg.seed,
                shared_heads=self.args.shared_heads and job.arch == "proposed",
                dtype=cfg.dtype,
            )
            result = Trainer(model, cfg).fit(train, val)
            model.load_state_dict(result.best_state)
            for split, dataset in evals.items():
                report: EvalReport = evaluate(model, dataset)
                row.scores[split] = SplitScore(100.0 * report.accuracy, report.auc)
                if report.curve is not None:
                    roc_path = out_dir / "roc" / f"{row.run_id}_{job.row}_{split}.csv"
                    write_roc_csv(report.curve, roc_path)
        except SepvoteError as err:
            self.logger.error(f"Scheme '{job.row}' failed: {err}")
            row.error = str(err)
        except Exception as err:  # noqa: BLE001
            self.logger.exception(f"Scheme '{job.row}' crashed: {type(err).__name__}: {err}")
            row.error = f"{type(err).__name__}: {err}"
        return row

    def run(self) -> None:
        cfg = self.train_config()
        profile = get_profile(self.args.profile)
        entries = load_manifest(self.args.manifest)
        workers = Validator.worker_count(self.args.max_workers)
        size = profile.input_size

        available = split_names(entries)
        missing = [s for s in self.args.eval_splits if s not in available]
        if missing:
            raise DataError(f"Evaluation splits {missing} not in manifest; found {available}")
        train = load_split(entries, "train", size, workers)
        val = load_split(entries, "val", size, workers)
        evals = {
            s: val if s == "val" else load_split(entries, s, size, workers)
            for s in self.args.eval_splits
        }

        out_dir = ensure_directory(resolve_path(self.args.out))
        jobs = self.jobs()
        self.logger.info(f"Ablation '{self.args.run_id}': {len(jobs)} runs on {workers} workers")
        with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(
                pool.map(
                    lambda job: self.run_job(job, cfg, profile, train, val, evals, out_dir), jobs
                )
            )

        report = AblationReport(splits=list(self.args.eval_splits), rows=rows)
        csv_path = report.write_csv(out_dir / f"{self.args.run_id}.csv")
        report.write_markdown(out_dir / f"{self.args.run_id}.md")
        print(report.render_markdown(), end="")
        failed = [r.scheme for r in rows if r.error]
        if failed:
            self.logger.warning(f"{len(failed)} runs failed: {failed}")
        self.logger.info(f"Report written to {csv_path}")


class ReportCommand(Command):
    name = "report"

    def run(self) -> None:
        merged = merge_reports(resolve_path(self.args.input_dir))
        text = merged.render_csv() if self.args.format == "csv" else merged.render_markdown()
        if self.args.out:
            path = resolve_path(self.args.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        else:
            print(text, end="")


COMMANDS: dict[str, type[Command]] = {
    cmd.name: cmd
    for cmd in (
        SynthCommand,
        TrainCommand,
        EvalCommand,
        PredictCommand,
        AblateCommand,
        ReportCommand,
    )
}


def get_command(name: str) -> type[Command]:
    try:
        return COMMANDS[name]
    except KeyError:
        raise UsageError(f"Unknown command: '{name}'. Available commands: {list(COMMANDS)}") from None
