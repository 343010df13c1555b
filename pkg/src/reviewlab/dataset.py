"""CSV ingestion, validation, filtering, and the deterministic split.

The input is an RFC-4180 CSV with a header row carrying the ten review
columns (a leading unnamed index column is tolerated, as shipped in the
public file).  Rows whose mandatory fields fail validation are collected
as issues with their line numbers, never silently dropped or repaired.
Optional text fields keep their exact contents so a parse -> write ->
parse cycle reproduces every record bit-for-bit; empty strings are read
back as absent values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import InputError
from .tensor import SeededRng

REQUIRED_COLUMNS = (
    "Clothing ID",
    "Age",
    "Title",
    "Review Text",
    "Rating",
    "Recommended IND",
    "Positive Feedback Count",
    "Division Name",
    "Department Name",
    "Class Name",
)

MIN_SPLIT_RECORDS = 5


@dataclass(frozen=True)
class ReviewRecord:
    row_id: int
    clothing_id: int
    age: int
    title: str | None
    review_text: str | None
    rating: int
    recommended: bool
    positive_feedback_count: int
    division: str | None
    department: str | None
    class_name: str | None


@dataclass(frozen=True)
class RowIssue:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def _optional(value: str) -> str | None:
    return value if value != "" else None


def parse_csv(path):
    """Read records and per-row issues from a review CSV.

    Returns (records, issues).  A missing required header column raises
    an InputError naming every absent column.
    """
    records: list[ReviewRecord] = []
    issues: list[RowIssue] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file, expected a header row") from None
        names = [h.strip() for h in header]
        positions = {name: i for i, name in enumerate(names)}
        missing = [c for c in REQUIRED_COLUMNS if c not in positions]
        if missing:
            raise InputError(f"{path}: missing required columns: {', '.join(missing)}")
        has_index_column = names[0] == ""
        width = len(header)

        for ordinal, row in enumerate(reader):
            line = reader.line_num
            if len(row) != width:
                issues.append(
                    RowIssue(line, f"expected {width} fields, got {len(row)}")
                )
                continue

            problems: list[str] = []

            def intcell(name, minimum=None, maximum=None):
                raw = row[positions[name]]
                try:
                    value = int(raw)
                except ValueError:
                    problems.append(f"{name} not an integer: {raw!r}")
                    return None
                if minimum is not None and value < minimum:
                    problems.append(f"{name} out of range: {value}")
                    return None
                if maximum is not None and value > maximum:
                    problems.append(f"{name} out of range: {value}")
                    return None
                return value

            if has_index_column:
                try:
                    row_id = int(row[0])
                except ValueError:
                    problems.append(f"index column not an integer: {row[0]!r}")
                    row_id = None
            else:
                row_id = ordinal

            clothing_id = intcell("Clothing ID", minimum=0)
            age = intcell("Age", minimum=0)
            rating = intcell("Rating", minimum=1, maximum=5)
            recommended = intcell("Recommended IND", minimum=0, maximum=1)
            feedback = intcell("Positive Feedback Count", minimum=0)

            if problems:
                issues.append(RowIssue(line, "; ".join(problems)))
                continue

            records.append(
                ReviewRecord(
                    row_id=row_id,
                    clothing_id=clothing_id,
                    age=age,
                    title=_optional(row[positions["Title"]]),
                    review_text=_optional(row[positions["Review Text"]]),
                    rating=rating,
                    recommended=bool(recommended),
                    positive_feedback_count=feedback,
                    division=_optional(row[positions["Division Name"]]),
                    department=_optional(row[positions["Department Name"]]),
                    class_name=_optional(row[positions["Class Name"]]),
                )
            )
    return records, issues


def write_csv(records, path, sentiment=None) -> None:
    """Write records in the input layout; optionally append a Sentiment column.

    The leading unnamed index column carries row_id, matching the public
    file's shape, so written files re-parse to identical records.
    """
    if sentiment is not None and len(sentiment) != len(records):
        raise ValueError(
            f"sentiment column length {len(sentiment)} does not match {len(records)} records"
        )
    header = ["", *REQUIRED_COLUMNS]
    if sentiment is not None:
        header.append("Sentiment")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for pos, r in enumerate(records):
            row = [
                r.row_id,
                r.clothing_id,
                r.age,
                r.title if r.title is not None else "",
                r.review_text if r.review_text is not None else "",
                r.rating,
                int(r.recommended),
                r.positive_feedback_count,
                r.division if r.division is not None else "",
                r.department if r.department is not None else "",
                r.class_name if r.class_name is not None else "",
            ]
            if sentiment is not None:
                row.append(sentiment[pos])
            writer.writerow(row)


def write_issues(issues, path) -> None:
    """One issue per line, in input order."""
    with open(path, "w", encoding="utf-8") as fh:
        for issue in issues:
            fh.write(f"{issue}\n")


def filter_for_classification(records):
    """Drop records without review text; return (kept, dropped_count)."""
    kept = [r for r in records if r.review_text is not None]
    return kept, len(records) - len(kept)


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint index lists into the record list handed to the splitter."""

    train: tuple
    validation: tuple
    test: tuple
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


def split_60_20_20(records, seed: int) -> DatasetSplit:
    """Seeded shuffle, then contiguous 60/20/20 slices.

    train gets floor(0.6 n), validation floor(0.2 n), test the remainder.
    """
    n = len(records)
    if n < MIN_SPLIT_RECORDS:
        raise InputError(f"need at least {MIN_SPLIT_RECORDS} records to split, got {n}")
    indices = list(range(n))
    SeededRng(seed).shuffle(indices)
    n_train = (6 * n) // 10
    n_val = (2 * n) // 10
    return DatasetSplit(
        train=tuple(indices[:n_train]),
        validation=tuple(indices[n_train:n_train + n_val]),
        test=tuple(indices[n_train + n_val:]),
        seed=seed,
    )
