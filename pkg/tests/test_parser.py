"""Tests for CLI argument parser."""

import os
from unittest.mock import patch

import pytest

from sepvote.cli.parser import build_parser, parse_args
from sepvote.errors import UsageError
from sepvote.segmentation.scheme import SEGMENT_SCHEME_NAMES


@pytest.fixture
def manifest(tmp_path):
    path = tmp_path / "manifest.jsonl"
    path.write_text("")
    return str(path)


class TestEnvironmentVariables:
    """Tests for environment variable support in CLI parser."""

    def test_env_vars_used_when_cli_args_not_provided(self, manifest):
        """Environment variables should be used as defaults when CLI args are omitted."""
        env_vars = {"SEPVOTE_PROFILE": "desk", "SEPVOTE_SEED": "11"}
        with patch.dict(os.environ, env_vars, clear=False):
            with patch("sys.argv", ["sepvote", "train", "--manifest", manifest, "--out", "m.sgf"]):
                args = parse_args()

        assert args.profile == "desk"
        assert args.seed == 11

    def test_cli_args_override_env_vars(self, manifest):
        """CLI arguments should take precedence over environment variables."""
        env_vars = {"SEPVOTE_PROFILE": "desk", "SEPVOTE_SEED": "11"}
        argv = [
            "sepvote",
            "train",
            "--manifest",
            manifest,
            "--out",
            "m.sgf",
            "--profile",
            "full",
            "--seed",
            "3",
        ]
        with patch.dict(os.environ, env_vars, clear=False):
            with patch("sys.argv", argv):
                args = parse_args()

        assert args.profile == "full"
        assert args.seed == 3

    def test_malformed_seed_env_var(self, manifest):
        """A non-integer SEPVOTE_SEED should raise a usage error."""
        with patch.dict(os.environ, {"SEPVOTE_SEED": "abc"}, clear=False):
            with pytest.raises(UsageError):
                parse_args(["train", "--manifest", manifest, "--out", "m.sgf"])


class TestDefaultValues:
    """Tests for default values of optional arguments."""

    def test_train_defaults(self, manifest):
        """Train should default to the v5 scheme and the proposed architecture."""
        with patch.dict(os.environ, {}, clear=True):
            args = parse_args(["train", "--manifest", manifest, "--out", "m.sgf"])

        assert args.command == "train"
        assert args.scheme == "v5"
        assert args.arch == "proposed"
        assert args.profile == "full"
        assert args.seed is None
        assert args.epochs is None and args.lr is None and args.dtype is None
        assert args.max_workers == 0
        assert not args.shared_heads

    def test_eval_defaults(self, manifest):
        """Eval should default to the test split and no scheme check."""
        args = parse_args(["eval", "--model", manifest, "--manifest", manifest])
        assert args.split == "test"
        assert args.scheme is None
        assert args.threshold is None

    def test_ablate_defaults(self, manifest):
        """Ablate should default to every segmentation scheme and the segmented Mesonet."""
        args = parse_args(["ablate", "--manifest", manifest, "--out", "reports"])
        assert args.schemes == list(SEGMENT_SCHEME_NAMES)
        assert args.arch == "mesonet-seg"
        assert args.eval_splits == ["val"]
        assert args.run_id == "run"
        assert not args.baseline

    def test_synth_defaults(self):
        """Synth should default to 10 images per class at 64x64 in PNG."""
        args = parse_args(["synth", "--out", "data"])
        assert (args.count, args.size, args.format) == (10, 64, "png")
        assert (args.val_fraction, args.test_fraction) == (0.2, 0.0)

    def test_report_defaults(self):
        """Report should render Markdown to stdout by default."""
        args = parse_args(["report", "--in", "reports"])
        assert args.input_dir == "reports"
        assert args.format == "md"
        assert args.out is None


class TestValidatorIntegration:
    """Tests for validators wired into the parser."""

    def test_scheme_is_normalized(self, manifest):
        """Scheme names should be normalized by the validator."""
        args = parse_args(["train", "--manifest", manifest, "--out", "m", "--scheme", "CEN30"])
        assert args.scheme == "cen30"

    def test_unknown_scheme_exits_with_usage_status(self, manifest, capsys):
        """An unknown scheme should exit with status 1 and list the valid names."""
        with pytest.raises(SystemExit) as exc:
            parse_args(["train", "--manifest", manifest, "--out", "m", "--scheme", "v4"])
        assert exc.value.code == 1
        assert "Valid schemes: ori, v3_h, v3_v, v5" in capsys.readouterr().err

    def test_missing_manifest_file(self, tmp_path):
        """A manifest path that does not exist should be rejected."""
        with pytest.raises(SystemExit) as exc:
            parse_args(["train", "--manifest", str(tmp_path / "none.jsonl"), "--out", "m"])
        assert exc.value.code == 1

    def test_zero_epochs_rejected(self, manifest):
        """Epochs must be positive."""
        with pytest.raises(SystemExit):
            parse_args(["train", "--manifest", manifest, "--out", "m", "--epochs", "0"])

    def test_threshold_out_of_range(self, manifest):
        """Eval thresholds must lie in [0, 1]."""
        with pytest.raises(SystemExit):
            parse_args(["eval", "--model", manifest, "--manifest", manifest, "--threshold", "2"])

    def test_unknown_architecture(self, manifest):
        """Architectures are restricted to the registry."""
        with pytest.raises(SystemExit):
            parse_args(["train", "--manifest", manifest, "--out", "m", "--arch", "resnet"])

    def test_missing_required_argument(self):
        """A missing required option should exit with status 1."""
        with pytest.raises(SystemExit) as exc:
            parse_args(["train", "--out", "m"])
        assert exc.value.code == 1


class TestOptionalArguments:
    """Tests for optional arguments and flags."""

    def test_training_overrides(self, manifest):
        """Training flags should be parsed to their types."""
        args = parse_args(
            [
                "train",
                "--manifest",
                manifest,
                "--out",
                "m",
                "--epochs",
                "3",
                "--batch-size",
                "8",
                "--lr",
                "0.01",
                "--dtype",
                "f64",
                "--shared-heads",
            ]
        )
        assert (args.epochs, args.batch_size, args.lr, args.dtype) == (3, 8, 0.01, "f64")
        assert args.shared_heads

    def test_ablation_lists(self, manifest):
        """Scheme and split lists should be split on commas."""
        args = parse_args(
            [
                "ablate",
                "--manifest",
                manifest,
                "--out",
                "r",
                "--schemes",
                "ori,v5",
                "--eval-splits",
                "val,test",
                "--baseline",
            ]
        )
        assert args.schemes == ["ori", "v5"]
        assert args.eval_splits == ["val", "test"]
        assert args.baseline

    def test_predict_json_flag(self, manifest):
        """Predict should accept --json."""
        args = parse_args(["predict", "--model", manifest, "--image", manifest, "--json"])
        assert args.json


class TestHelp:
    """Tests for help output."""

    def test_no_arguments_prints_help(self, capsys):
        """Running without arguments should print help and exit 0."""
        with pytest.raises(SystemExit) as exc:
            parse_args([])
        assert exc.value.code == 0
        assert "COMMAND" in capsys.readouterr().out

    def test_subcommand_help_lists_schemes(self, capsys):
        """Subcommand help should list the valid scheme names."""
        with pytest.raises(SystemExit):
            parse_args(["train", "--help"])
        out = capsys.readouterr().out
        assert "--scheme" in out
        assert "cen90" in out

    def test_all_subcommands_registered(self):
        """Every documented subcommand should be available."""
        parser = build_parser()
        sub = next(a for a in parser._actions if a.dest == "command")
        assert list(sub.choices) == ["synth", "train", "eval", "predict", "ablate", "report"]

    def test_list_defaults_are_comma_joined(self, capsys):
        """List defaults should be shown in the comma-separated form the flag accepts."""
        with patch.dict(os.environ, {"COLUMNS": "400"}):
            with pytest.raises(SystemExit):
                parse_args(["ablate", "--help"])
        out = capsys.readouterr().out
        assert "(default: 'ori,v3_h,v3_v,v5,v7_h,v7_v,v10,v17,v26,v37')" in out
        assert "['ori'" not in out
