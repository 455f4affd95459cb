"""Command-line argument parser for sepvote."""

import argparse
import os
import sys
from collections.abc import Sequence
from importlib.metadata import PackageNotFoundError, version

from sepvote.autodiff.tensor import DTYPES
from sepvote.cli.formatter import CustomHelpFormatter
from sepvote.cli.validator import Validator
from sepvote.errors import UsageError
from sepvote.models.profiles import DEFAULT_PROFILE, PROFILES
from sepvote.segmentation.scheme import SCHEME_NAMES, SEGMENT_SCHEME_NAMES
from sepvote.utils.registry import architecture_registry

try:
    VERSION = version("sepvote")
except PackageNotFoundError:
    VERSION = "0.0.0.dev"

SCHEME_HELP = f"Valid schemes: {', '.join(SCHEME_NAMES)}."


class SepvoteArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(UsageError.exit_code, f"{self.prog}: error: {message}\n")


def _env_seed() -> int | None:
    return Validator.env_int("SEPVOTE_SEED")


def _add_general(group: argparse._ArgumentGroup) -> None:
    group.add_argument("-h", "--help", action="help", help="Show this help message and exit.")


def _add_model_options(group: argparse._ArgumentGroup, default_arch: str) -> None:
    group.add_argument(
        "--arch",
        choices=architecture_registry.names(),
        default=default_arch,
        help="Detector architecture.",
        metavar="",
    )
    group.add_argument(
        "--profile",
        choices=sorted(PROFILES),
        default=os.getenv("SEPVOTE_PROFILE", DEFAULT_PROFILE),
        help=(
            "Size profile: 'full' (256x256 inputs) or 'desk' (64x64 inputs, narrower layers). "
            "Can also be set via SEPVOTE_PROFILE."
        ),
        metavar="",
    )
    group.add_argument(
        "--shared-heads",
        action="store_true",
        help="Share one SModel head across all blocks (proposed architecture only).",
    )


def _add_training_options(group: argparse._ArgumentGroup) -> None:
    group.add_argument(
        "--config",
        type=Validator.existing_path,
        default=None,
        help="JSON or TOML file with training settings; flags below override its values.",
        metavar="",
    )
    group.add_argument(
        "--seed",
        type=Validator.non_negative_int,
        default=_env_seed(),
        help="Seed for initialisation and shuffling. Can also be set via SEPVOTE_SEED.",
        metavar="",
    )
    group.add_argument(
        "--epochs", type=Validator.positive_int, default=None, help="Training epochs.", metavar=""
    )
    group.add_argument(
        "--batch-size",
        type=Validator.positive_int,
        default=None,
        help="Samples per Adam step.",
        metavar="",
    )
    group.add_argument("--lr", type=float, default=None, help="Initial learning rate.", metavar="")
    group.add_argument(
        "--dtype", choices=sorted(DTYPES), default=None, help="Parameter precision.", metavar=""
    )
    group.add_argument(
        "--max-workers",
        type=int,
        default=0,
        help="Threads for image decoding, evaluation and parallel ablation runs. Use 0 for CPU count.",
        metavar="",
    )


def _synth_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "synth",
        help="Generate a synthetic splice-tamper dataset.",
        description="Generate a synthetic splice-tamper dataset with a JSONL manifest.",
        formatter_class=CustomHelpFormatter,
        add_help=False,
    )
    g = p.add_argument_group("Synthetic data options")
    _add_general(g)
    g.add_argument("--out", required=True, help="Output directory.", metavar="")
    g.add_argument(
        "--count", type=Validator.positive_int, default=10, help="Images per class.", metavar=""
    )
    g.add_argument(
        "--size", type=Validator.positive_int, default=64, help="Image side in pixels.", metavar=""
    )
    g.add_argument(
        "--seed",
        type=Validator.non_negative_int,
        default=_env_seed(),
        help="Generator seed (0 when unset). Can also be set via SEPVOTE_SEED.",
        metavar="",
    )
    g.add_argument(
        "--patch-min", type=float, default=0.2, help="Smallest patch side fraction.", metavar=""
    )
    g.add_argument(
        "--patch-max", type=float, default=0.4, help="Largest patch side fraction.", metavar=""
    )
    g.add_argument(
        "--feather",
        type=Validator.non_negative_int,
        default=2,
        help="Blended border width in pixels.",
        metavar="",
    )
    g.add_argument(
        "--blur",
        type=Validator.non_negative_int,
        default=1,
        help="Box-blur radius inside the patch.",
        metavar="",
    )
    g.add_argument(
        "--val-fraction",
        type=Validator.fraction,
        default=0.2,
        help="Share of each class assigned to the 'val' split.",
        metavar="",
    )
    g.add_argument(
        "--test-fraction",
        type=Validator.fraction,
        default=0.0,
        help="Share of each class assigned to the 'test' split.",
        metavar="",
    )
    g.add_argument(
        "--format", choices=["png", "ppm"], default="png", help="Image file format.", metavar=""
    )


def _train_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "train",
        help="Train a detector and write its best checkpoint.",
        description=f"Train a detector on the manifest's train split. {SCHEME_HELP}",
        formatter_class=CustomHelpFormatter,
        add_help=False,
    )
    g = p.add_argument_group("Training options")
    _add_general(g)
    g.add_argument(
        "--manifest",
        required=True,
        type=Validator.existing_path,
        help="JSONL manifest with 'train' and 'val' splits.",
        metavar="",
    )
    g.add_argument(
        "--scheme",
        type=Validator.scheme_name,
        default="v5",
        help=f"Segmentation scheme. {SCHEME_HELP}",
        metavar="",
    )
    g.add_argument("--out", required=True, help="Checkpoint file to write.", metavar="")
    g.add_argument(
        "--log",
        default=None,
        help="Training-log JSON path. Defaults to the checkpoint path with a .log.json suffix.",
        metavar="",
    )
    _add_model_options(g, "proposed")
    _add_training_options(g)


def _eval_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "eval",
        help="Evaluate a checkpoint on one split.",
        description=f"Evaluate a checkpoint: accuracy, ROC/AUC and optimal cutoff. {SCHEME_HELP}",
        formatter_class=CustomHelpFormatter,
        add_help=False,
    )
    g = p.add_argument_group("Evaluation options")
    _add_general(g)
    g.add_argument(
        "--model", required=True, type=Validator.existing_path, help="Checkpoint.", metavar=""
    )
    g.add_argument(
        "--manifest", required=True, type=Validator.existing_path, help="JSONL manifest.", metavar=""
    )
    g.add_argument("--split", default="test", help="Split to evaluate.", metavar="")
    g.add_argument(
        "--scheme",
        type=Validator.scheme_name,
        default=None,
        help="Scheme the checkpoint must have been trained with.",
        metavar="",
    )
    g.add_argument("--roc-csv", default=None, help="Where to write the ROC curve CSV.", metavar="")
    g.add_argument(
        "--report", default=None, help="Report JSON path; printed to stdout when unset.", metavar=""
    )
    g.add_argument(
        "--threshold",
        type=Validator.probability,
        default=None,
        help="Also report accuracy at this score threshold.",
        metavar="",
    )
    g.add_argument(
        "--max-workers", type=int, default=0, help="Threads for decoding and scoring.", metavar=""
    )


def _predict_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "predict",
        help="Classify one image as REAL or FAKE.",
        description="Classify one pre-cropped face image by hard voting over the model's heads.",
        formatter_class=CustomHelpFormatter,
        add_help=False,
    )
    g = p.add_argument_group("Prediction options")
    _add_general(g)
    g.add_argument(
        "--model", required=True, type=Validator.existing_path, help="Checkpoint.", metavar=""
    )
    g.add_argument(
        "--image", required=True, type=Validator.existing_path, help="Image file.", metavar=""
    )
    g.add_argument(
        "--json", action="store_true", help="Print per-voter labels, probabilities and the tally."
    )


def _ablate_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "ablate",
        help="Train and evaluate one model per scheme.",
        description=f"Compare segmentation schemes under a shared seed and config. {SCHEME_HELP}",
        formatter_class=CustomHelpFormatter,
        add_help=False,
    )
    g = p.add_argument_group("Ablation options")
    _add_general(g)
    g.add_argument(
        "--manifest", required=True, type=Validator.existing_path, help="JSONL manifest.", metavar=""
    )
    g.add_argument(
        "--schemes",
        type=Validator.scheme_list,
        default=list(SEGMENT_SCHEME_NAMES),
        help=f"Comma-separated schemes, or 'all'. {SCHEME_HELP}",
        metavar="",
    )
    g.add_argument("--out", required=True, help="Output directory for reports.", metavar="")
    g.add_argument(
        "--eval-splits",
        type=Validator.split_list,
        default=["val"],
        help="Comma-separated splits to report accuracy and AUC on.",
        metavar="",
    )
    g.add_argument("--run-id", default="run", help="Identifier of this run in reports.", metavar="")
    g.add_argument(
        "--baseline",
        action="store_true",
        help="Add a plain Mesonet row named 'ori_mesonet'.",
    )
    _add_model_options(g, "mesonet-seg")
    _add_training_options(g)


def _report_parser(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "report",
        help="Merge ablation reports into one table.",
        description="Merge the ablation CSV reports found in a directory.",
        formatter_class=CustomHelpFormatter,
        add_help=False,
    )
    g = p.add_argument_group("Report options")
    _add_general(g)
    g.add_argument(
        "--in",
        dest="input_dir",
        required=True,
        help="Directory holding ablation CSV reports.",
        metavar="",
    )
    g.add_argument("--format", choices=["csv", "md"], default="md", help="Output format.", metavar="")
    g.add_argument("--out", default=None, help="Output file; stdout when unset.", metavar="")


def build_parser() -> SepvoteArgumentParser:
    parser = SepvoteArgumentParser(
        prog="sepvote",
        usage="%(prog)s COMMAND OPTIONS",
        description="Face forgery detection with segmented latent features and hard voting",
        formatter_class=CustomHelpFormatter,
        add_help=False,
        allow_abbrev=False,
    )
    general = parser.add_argument_group("General options")
    _add_general(general)
    general.add_argument(
        "--version",
        action="version",
        version=f"sepvote {VERSION}",
        help="Show program version and exit.",
    )

    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for add in (
        _synth_parser,
        _train_parser,
        _eval_parser,
        _predict_parser,
        _ablate_parser,
        _report_parser,
    ):
        add(sub)
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """
    Parse CLI arguments and return an argparse namespace.

    With no arguments at all the top-level help is printed.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_help()
        parser.exit()
    return parser.parse_args(argv)
