"""
Ablation reports: one row per scheme with an (accuracy %, AUC) pair per evaluated split.

Reports are written as CSV and as a Markdown table. The CSV files of several runs can be merged;
rows stay distinct through their run id.
"""

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from sepvote.errors import DataError
from sepvote.utils.logger import set_logger

BASELINE_ROW = "ori_mesonet"
FIXED_COLUMNS = ("run_id", "scheme", "arch")

logger = set_logger(__name__)


def format_accuracy(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def format_auc(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def _parse(cell: str) -> float | None:
    cell = cell.strip()
    return None if cell in ("", "-") else float(cell)


@dataclass(frozen=True)
class SplitScore:
    accuracy: float | None
    auc: float | None

    def __post_init__(self) -> None:
        if self.auc is not None and not 0.0 <= self.auc <= 1.0:
            raise DataError(f"AUC outside [0, 1]: {self.auc}")


@dataclass
class AblationRow:
    run_id: str
    scheme: str
    arch: str
    scores: dict[str, SplitScore] = field(default_factory=dict)
    error: str | None = None

    def cells(self, splits: list[str]) -> list[str]:
        out = [self.run_id, self.scheme, self.arch]
        for split in splits:
            score = self.scores.get(split, SplitScore(None, None))
            out += [format_accuracy(score.accuracy), format_auc(score.auc)]
        out.append(self.error or "")
        return out


@dataclass
class AblationReport:
    """Rows of one or more ablation runs over a common list of splits."""

    splits: list[str]
    rows: list[AblationRow] = field(default_factory=list)

    @property
    def header(self) -> list[str]:
        cols = list(FIXED_COLUMNS)
        for split in self.splits:
            cols += [f"{split}_accuracy", f"{split}_auc"]
        return cols + ["error"]

    def table(self) -> list[list[str]]:
        return [row.cells(self.splits) for row in self.rows]

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(self.render_csv())
        return path

    def render_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.table())
        return buffer.getvalue()

    def render_markdown(self) -> str:
        """Table with columns Run, Scheme, Arch, then Accuracy (%) and AUC per split."""
        header = ["Run", "Scheme", "Arch"]
        for split in self.splits:
            header += [f"{split} Accuracy (%)", f"{split} AUC"]
        header.append("Error")
        lines = [
            "| " + " | ".join(header) + " |",
            "|" + "|".join(["---"] * len(header)) + "|",
        ]
        for cells in self.table():
            shown = [c if c else "-" for c in cells[:-1]] + [cells[-1].replace("|", "/")]
            lines.append("| " + " | ".join(shown) + " |")
        return "\n".join(lines) + "\n"

    def write_markdown(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render_markdown())
        return path


def read_report_csv(path: str | Path) -> AblationReport:
    """
    Read a report written by `AblationReport.write_csv`.

    Raises:
        DataError: The header does not have the report layout.
    """
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"Empty report file: {path}") from None
        body = list(reader)

    if tuple(header[:3]) != FIXED_COLUMNS or header[-1] != "error" or len(header) % 2:
        raise DataError(f"Not an ablation report: {path}")
    metric_cols = header[3:-1]
    splits = [c[: -len("_accuracy")] for c in metric_cols[::2]]

    report = AblationReport(splits=splits)
    for cells in body:
        if len(cells) != len(header):
            raise DataError(f"Row of {len(cells)} cells in {path}; expected {len(header)}")
        scores = {
            split: SplitScore(_parse(cells[3 + 2 * i]), _parse(cells[4 + 2 * i]))
            for i, split in enumerate(splits)
        }
        report.rows.append(
            AblationRow(cells[0], cells[1], cells[2], scores, cells[-1] or None)
        )
    return report


def merge_reports(directory: str | Path) -> AblationReport:
    """
    Merge every report CSV under `directory` (sorted by file name).

    Splits are the union of all reports' splits in first-seen order. Rows are all kept.

    Raises:
        DataError: The directory holds no report.
    """
    directory = Path(directory)
    files = sorted(directory.glob("*.csv")) if directory.is_dir() else []
    reports = []
    for path in files:
        try:
            reports.append(read_report_csv(path))
        except DataError as err:
            logger.warning(f"Skipping {path.name}: {err}")
    if not reports:
        raise DataError(f"No ablation reports found in {directory}")

    splits: list[str] = []
    for report in reports:
        splits += [s for s in report.splits if s not in splits]
    merged = AblationReport(splits=splits)
    for report in reports:
        merged.rows.extend(report.rows)
    return merged


def parse_markdown(text: str) -> list[list[str]]:
    """Cells of the body rows of a table produced by `render_markdown`, '-' read as empty."""
    rows = []
    for line in text.strip().splitlines()[2:]:
        cells = [c.strip() for c in line.strip().strip("|").split("|")]
        rows.append(["" if c == "-" else c for c in cells])
    return rows
