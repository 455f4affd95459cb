"""End-to-end tests of the command-line interface on the desk profile."""

import contextlib
import io
import json
from unittest.mock import patch

import pytest

from sepvote.cli.ablation import (
    AblationReport,
    AblationRow,
    SplitScore,
    merge_reports,
    parse_markdown,
    read_report_csv,
)
from sepvote.cli.commands import get_command
from sepvote.cli.main import run
from sepvote.data.synth import CONFIG_NAME, MANIFEST_NAME
from sepvote.errors import DataError, ShapeError, UsageError
from sepvote.segmentation.scheme import SCHEME_NAMES
from sepvote.training.engine import Trainer

DESK = ["--profile", "desk", "--max-workers", "1"]


def _run(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = run(argv)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A synthetic dataset and a one-epoch v5 checkpoint trained on it."""
    root = tmp_path_factory.mktemp("cli")
    code, out = _run(
        [
            "synth",
            "--out",
            str(root / "data"),
            "--count",
            "4",
            "--size",
            "64",
            "--seed",
            "2",
            "--val-fraction",
            "0.25",
            "--test-fraction",
            "0.25",
        ]
    )
    assert code == 0, out
    manifest = root / "data" / MANIFEST_NAME

    code, out = _run(
        [
            "train",
            "--manifest",
            str(manifest),
            "--scheme",
            "v5",
            "--out",
            str(root / "model.sgf"),
            "--epochs",
            "1",
            "--batch-size",
            "4",
            *DESK,
        ]
    )
    assert code == 0, out
    return {"root": root, "manifest": manifest, "train_out": out}


class TestExitCodes:
    """Tests for the mapping of failures to exit statuses."""

    def test_no_arguments_prints_help(self):
        code, out = _run([])
        assert code == 0
        assert "synth" in out and "ablate" in out

    def test_version(self):
        code, out = _run(["--version"])
        assert code == 0
        assert out.startswith("sepvote ")

    def test_bogus_scheme(self, workspace, capsys):
        code, _ = _run(
            ["train", "--manifest", str(workspace["manifest"]), "--out", "x", "--scheme", "v4"]
        )
        assert code == 1
        assert "Valid schemes: ori, v3_h" in capsys.readouterr().err

    def test_missing_manifest(self, tmp_path):
        code, _ = _run(["train", "--manifest", str(tmp_path / "none.jsonl"), "--out", "x"])
        assert code == 1

    def test_corrupt_checkpoint(self, workspace, tmp_path):
        bad = tmp_path / "bad.sgf"
        bad.write_bytes(b"nothing here")
        code, _ = _run(["eval", "--model", str(bad), "--manifest", str(workspace["manifest"])])
        assert code == 2

    def test_scheme_mismatch(self, workspace):
        code, _ = _run(
            [
                "eval",
                "--model",
                str(workspace["root"] / "model.sgf"),
                "--manifest",
                str(workspace["manifest"]),
                "--scheme",
                "v10",
            ]
        )
        assert code == 2

    def test_unknown_split(self, workspace):
        code, _ = _run(
            [
                "eval",
                "--model",
                str(workspace["root"] / "model.sgf"),
                "--manifest",
                str(workspace["manifest"]),
                "--split",
                "holdout",
            ]
        )
        assert code == 2

    def test_blocks_too_small_is_usage_error(self, workspace, tmp_path):
        code, _ = _run(
            [
                "train",
                "--manifest",
                str(workspace["manifest"]),
                "--scheme",
                "v10",
                "--out",
                str(tmp_path / "m.sgf"),
                "--epochs",
                "1",
                *DESK,
            ]
        )
        assert code == 1

    def test_bad_input_shape_is_data_error(self, workspace, tmp_path):
        with patch(
            "sepvote.cli.commands.load_split",
            side_effect=ShapeError("Dataset pixel values must lie in [0, 1]"),
        ):
            code, _ = _run(
                [
                    "train",
                    "--manifest",
                    str(workspace["manifest"]),
                    "--out",
                    str(tmp_path / "m.sgf"),
                    *DESK,
                ]
            )
        assert code == 2

    def test_unknown_command(self):
        with pytest.raises(UsageError):
            get_command("serve")


class TestPipeline:
    """synth -> train -> eval -> predict."""

    def test_synth_wrote_files(self, workspace):
        data = workspace["root"] / "data"
        assert len(list((data / "images").iterdir())) == 8
        assert (data / CONFIG_NAME).exists()

    def test_train_summary(self, workspace):
        summary = json.loads(workspace["train_out"].strip().splitlines()[-1])
        assert summary["best_epoch"] == 1
        assert summary["checkpoint"].endswith("model.sgf")
        log = json.loads((workspace["root"] / "model.log.json").read_text())
        assert log["model"]["scheme"] == "v5"
        assert len(log["epochs"]) == 1
        assert log["config"]["epochs"] == 1

    def test_eval_report_and_roc(self, workspace):
        root = workspace["root"]
        code, _ = _run(
            [
                "eval",
                "--model",
                str(root / "model.sgf"),
                "--manifest",
                str(workspace["manifest"]),
                "--scheme",
                "v5",
                "--roc-csv",
                str(root / "roc.csv"),
                "--report",
                str(root / "report.json"),
                "--threshold",
                "0.4",
            ]
        )
        assert code == 0
        report = json.loads((root / "report.json").read_text())
        assert report["split"] == "test"
        assert report["count"] == 2
        assert 0.0 <= report["auc"] <= 1.0
        assert report["threshold"] == 0.4
        assert (root / "roc.csv").read_text().startswith("threshold,fpr,tpr\ninf,0,0\n")

    def test_eval_prints_report(self, workspace):
        code, out = _run(
            [
                "eval",
                "--model",
                str(workspace["root"] / "model.sgf"),
                "--manifest",
                str(workspace["manifest"]),
                "--split",
                "val",
            ]
        )
        assert code == 0
        assert json.loads(out)["split"] == "val"

    def test_predict(self, workspace):
        image = sorted((workspace["root"] / "data" / "images").iterdir())[0]
        model = str(workspace["root"] / "model.sgf")
        code, out = _run(["predict", "--model", model, "--image", str(image)])
        assert code == 0
        assert out.strip() in ("REAL", "FAKE")

        code, out = _run(["predict", "--model", model, "--image", str(image), "--json"])
        result = json.loads(out)
        assert len(result["per_voter"]) == 5
        assert result["tally"]["real"] + result["tally"]["fake"] == 5


@pytest.mark.slow
class TestAblation:
    """Tests for scheme ablations and merged reports."""

    def test_ablate_and_report(self, workspace, tmp_path):
        out_dir = tmp_path / "reports"
        code, out = _run(
            [
                "ablate",
                "--manifest",
                str(workspace["manifest"]),
                "--schemes",
                "ori,v3_h",
                "--eval-splits",
                "val,test",
                "--out",
                str(out_dir),
                "--run-id",
                "r1",
                "--baseline",
                "--epochs",
                "1",
                "--batch-size",
                "4",
                *DESK,
            ]
        )
        assert code == 0
        report = read_report_csv(out_dir / "r1.csv")
        assert [r.scheme for r in report.rows] == ["ori_mesonet", "ori", "v3_h"]
        assert all(r.error is None for r in report.rows)
        assert report.splits == ["val", "test"]

        table = parse_markdown((out_dir / "r1.md").read_text())
        assert table == report.table()
        assert out == (out_dir / "r1.md").read_text()

        code, csv_out = _run(["report", "--in", str(out_dir), "--format", "csv"])
        assert code == 0
        assert csv_out == (out_dir / "r1.csv").read_text()

    def test_failing_scheme_is_recorded(self, workspace, tmp_path):
        code, _ = _run(
            [
                "ablate",
                "--manifest",
                str(workspace["manifest"]),
                "--arch",
                "proposed",
                "--schemes",
                "ori,v10",
                "--out",
                str(tmp_path),
                "--epochs",
                "1",
                *DESK,
            ]
        )
        assert code == 0
        rows = {r.scheme: r for r in read_report_csv(tmp_path / "run.csv").rows}
        assert rows["ori"].error is None
        assert "at least 4x4" in rows["v10"].error

    def test_crashing_scheme_does_not_stop_the_run(self, workspace, tmp_path):
        original = Trainer.fit

        def fit(trainer, train, val=None):
            if trainer.model.scheme.name == "v3_h":
                raise FloatingPointError("overflow in exp")
            return original(trainer, train, val)

        with patch("sepvote.cli.commands.Trainer.fit", autospec=True, side_effect=fit):
            code, out = _run(
                [
                    "ablate",
                    "--manifest",
                    str(workspace["manifest"]),
                    "--schemes",
                    "ori,v3_h,v5",
                    "--out",
                    str(tmp_path),
                    "--epochs",
                    "1",
                    "--batch-size",
                    "4",
                    *DESK,
                ]
            )
        assert code == 0
        assert (tmp_path / "run.csv").exists()
        rows = {r.scheme: r for r in read_report_csv(tmp_path / "run.csv").rows}
        assert list(rows) == ["ori", "v3_h", "v5"]
        assert rows["ori"].error is None and rows["v5"].error is None
        assert rows["v3_h"].error == "FloatingPointError: overflow in exp"
        assert "v3_h" in out

    def test_every_scheme_on_a_small_set(self, tmp_path):
        data = tmp_path / "data"
        code, _ = _run(["synth", "--out", str(data), "--count", "100", "--seed", "5"])
        assert code == 0
        code, _ = _run(
            [
                "ablate",
                "--manifest",
                str(data / MANIFEST_NAME),
                "--schemes",
                "all",
                "--out",
                str(tmp_path / "reports"),
                "--epochs",
                "1",
                "--batch-size",
                "16",
                *DESK,
            ]
        )
        assert code == 0
        report = read_report_csv(tmp_path / "reports" / "run.csv")
        assert [r.scheme for r in report.rows] == list(SCHEME_NAMES)
        for row in report.rows:
            assert row.error is None, row.scheme
            assert 0.0 <= row.scores["val"].auc <= 1.0

    def test_missing_eval_split(self, workspace, tmp_path):
        code, _ = _run(
            [
                "ablate",
                "--manifest",
                str(workspace["manifest"]),
                "--schemes",
                "ori",
                "--eval-splits",
                "holdout",
                "--out",
                str(tmp_path),
                *DESK,
            ]
        )
        assert code == 2


class TestAblationReport:
    """Tests for report files without training."""

    @staticmethod
    def _report(run_id, splits, auc=0.75):
        rows = [
            AblationRow(run_id, "v5", "mesonet-seg", {s: SplitScore(96.8, auc) for s in splits}),
            AblationRow(run_id, "v10", "proposed", {}, error="blocks too small, 2x3"),
        ]
        return AblationReport(splits=splits, rows=rows)

    def test_csv_round_trip(self, tmp_path):
        report = self._report("a", ["val"])
        path = report.write_csv(tmp_path / "a.csv")
        again = read_report_csv(path)
        assert again.splits == ["val"]
        assert again.rows[0].scores["val"] == SplitScore(96.8, 0.75)
        assert again.rows[1].scores["val"] == SplitScore(None, None)
        assert again.rows[1].error == "blocks too small, 2x3"
        assert path.read_text() == report.render_csv()

    def test_quoted_cells_survive(self, tmp_path):
        row = AblationRow("q", "v5", "proposed", {}, error='bad "value", retry\nlater')
        report = AblationReport(splits=["val"], rows=[row])
        again = read_report_csv(report.write_csv(tmp_path / "q.csv"))
        assert again.rows[0].error == 'bad "value", retry\nlater'

    def test_markdown_matches_csv(self):
        report = self._report("a", ["val", "test"])
        md = report.render_markdown()
        assert md.splitlines()[0].startswith("| Run | Scheme | Arch | val Accuracy (%) | val AUC")
        assert parse_markdown(md) == report.table()
        assert "| - | - |" in md

    def test_merge_keeps_rows_and_unions_splits(self, tmp_path):
        self._report("a", ["val"]).write_csv(tmp_path / "a.csv")
        self._report("b", ["test"]).write_csv(tmp_path / "b.csv")
        (tmp_path / "notes.csv").write_text("x,y\n1,2\n")
        with patch("sepvote.cli.ablation.logger") as logger:
            merged = merge_reports(tmp_path)
        logger.warning.assert_called_once()
        assert "notes.csv" in logger.warning.call_args.args[0]
        assert merged.splits == ["val", "test"]
        assert [r.run_id for r in merged.rows] == ["a", "a", "b", "b"]

    def test_report_command_formats(self, tmp_path):
        self._report("a", ["val"]).write_csv(tmp_path / "a.csv")
        code, md = _run(["report", "--in", str(tmp_path)])
        assert code == 0
        code, csv_text = _run(["report", "--in", str(tmp_path), "--format", "csv"])
        assert code == 0
        body = [line.split(",") for line in csv_text.strip().splitlines()[1:]]
        assert [cells[:5] for cells in parse_markdown(md)] == [cells[:5] for cells in body]

    def test_empty_directory(self, tmp_path):
        with pytest.raises(DataError):
            merge_reports(tmp_path)
        code, _ = _run(["report", "--in", str(tmp_path)])
        assert code == 2

    def test_auc_range(self):
        with pytest.raises(DataError):
            SplitScore(50.0, 1.5)
