"""Tests for CSV ingestion, filtering, and the deterministic split."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reviewlab.dataset import (
    ReviewRecord,
    filter_for_classification,
    parse_csv,
    split_60_20_20,
    write_csv,
    write_issues,
)
from reviewlab.errors import InputError

HEADER = (
    ',Clothing ID,Age,Title,Review Text,Rating,Recommended IND,'
    'Positive Feedback Count,Division Name,Department Name,Class Name'
)


def make_csv(tmp_path, rows, header=HEADER):
    path = tmp_path / "reviews.csv"
    path.write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""),
                    encoding="utf-8")
    return path


def sample_rows():
    return [
        '0,767,33,,"Absolutely wonderful - silky and comfortable",4,1,0,Initmates,Intimate,Intimates',
        '1,1080,34,,"Love this dress!  it\'s sooo pretty.",5,1,4,General,Dresses,Dresses',
        '2,1077,60,Some major design flaws,"Flattering shirt",3,0,0,General,Dresses,Dresses',
        '3,1049,50,My favorite buy!,,5,1,0,General Petite,Bottoms,Pants',
        '4,847,47,Flattering,"Shirt is comfortable, love it!",5,1,6,General,Tops,Blouses',
        '5,1080,49,Not for the very petite,"Nice, but runs small",2,0,4,General,Dresses,Dresses',
    ]


class TestParseCsv:
    def test_parses_all_fields(self, tmp_path):
        path = make_csv(tmp_path, sample_rows())
        records, issues = parse_csv(path)
        assert issues == []
        assert len(records) == 6
        first = records[0]
        assert first.row_id == 0
        assert first.clothing_id == 767
        assert first.age == 33
        assert first.title is None
        assert first.review_text == "Absolutely wonderful - silky and comfortable"
        assert first.rating == 4
        assert first.recommended is True
        assert first.positive_feedback_count == 0
        assert first.division == "Initmates"
        assert first.department == "Intimate"
        assert first.class_name == "Intimates"

    def test_quoted_comma_single_field(self, tmp_path):
        """RFC-4180 quoting keeps the comma inside one field."""
        path = make_csv(tmp_path, ['0,1,25,Hi,"Great, fits!",5,1,0,A,B,C'])
        records, issues = parse_csv(path)
        assert issues == []
        assert records[0].review_text == "Great, fits!"

    def test_rating_out_of_range_is_issue(self, tmp_path):
        path = make_csv(tmp_path, ['0,1,25,,text,6,1,0,A,B,C'])
        records, issues = parse_csv(path)
        assert records == []
        assert len(issues) == 1
        assert "Rating out of range" in issues[0].message
        assert issues[0].line == 2

    def test_empty_text_is_absent(self, tmp_path):
        path = make_csv(tmp_path, ['0,1,25,,,5,1,0,A,B,C'])
        records, _ = parse_csv(path)
        assert records[0].review_text is None
        assert records[0].title is None

    def test_missing_columns_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("Clothing ID,Age\n1,25\n", encoding="utf-8")
        with pytest.raises(InputError, match="Rating"):
            parse_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(InputError, match="header"):
            parse_csv(path)

    def test_non_integer_fields_collected(self, tmp_path):
        path = make_csv(
            tmp_path,
            [
                '0,1,old,,text,5,1,0,A,B,C',
                '1,1,25,,text,5,maybe,0,A,B,C',
                '2,1,25,,text,5,1,0,A,B,C',
            ],
        )
        records, issues = parse_csv(path)
        assert len(records) == 1
        assert len(issues) == 2
        assert "Age not an integer" in issues[0].message
        assert "Recommended IND not an integer" in issues[1].message

    def test_multiple_problems_one_row_joined(self, tmp_path):
        path = make_csv(tmp_path, ['0,1,-4,,text,9,1,0,A,B,C'])
        _, issues = parse_csv(path)
        assert len(issues) == 1
        assert "Age out of range" in issues[0].message
        assert "Rating out of range" in issues[0].message

    def test_field_count_mismatch_is_issue(self, tmp_path):
        path = make_csv(tmp_path, ['0,1,25,,text,5,1,0,A,B'])
        records, issues = parse_csv(path)
        assert records == []
        assert "fields" in issues[0].message

    def test_quoted_newline_inside_field(self, tmp_path):
        path = make_csv(
            tmp_path, ['0,1,25,,"line one\nline two",5,1,0,A,B,C']
        )
        records, issues = parse_csv(path)
        assert issues == []
        assert records[0].review_text == "line one\nline two"

    def test_works_without_index_column(self, tmp_path):
        header = HEADER[1:]
        path = make_csv(tmp_path, ['1,25,,text,5,1,0,A,B,C'], header=header)
        records, _ = parse_csv(path)
        assert records[0].row_id == 0
        assert records[0].clothing_id == 1

    def test_extra_columns_tolerated(self, tmp_path):
        """A previously labeled file (extra Sentiment column) re-parses."""
        header = HEADER + ",Sentiment"
        path = make_csv(tmp_path, ['0,1,25,,text,5,1,0,A,B,C,positive'], header=header)
        records, issues = parse_csv(path)
        assert issues == []
        assert len(records) == 1

    def test_line_numbers_account_for_embedded_newlines(self, tmp_path):
        path = make_csv(
            tmp_path,
            ['0,1,25,,"a\nb",5,1,0,A,B,C', '1,1,25,,text,9,1,0,A,B,C'],
        )
        _, issues = parse_csv(path)
        assert issues[0].line == 4


class TestRoundTrip:
    def test_parse_write_parse_identical(self, tmp_path):
        path = make_csv(tmp_path, sample_rows())
        records, _ = parse_csv(path)
        out = tmp_path / "rewritten.csv"
        write_csv(records, out)
        records2, issues2 = parse_csv(out)
        assert issues2 == []
        assert records2 == records

    def test_sentiment_column_appended(self, tmp_path):
        path = make_csv(tmp_path, sample_rows()[:2])
        records, _ = parse_csv(path)
        out = tmp_path / "labeled.csv"
        write_csv(records, out, sentiment=["positive", "negative"])
        text = out.read_text(encoding="utf-8")
        assert text.splitlines()[0].endswith(",Sentiment")
        assert text.splitlines()[1].endswith(",positive")
        records2, _ = parse_csv(out)
        assert records2 == records

    def test_sentiment_length_mismatch(self, tmp_path):
        path = make_csv(tmp_path, sample_rows()[:2])
        records, _ = parse_csv(path)
        with pytest.raises(ValueError, match="length"):
            write_csv(records, tmp_path / "x.csv", sentiment=["positive"])

    def test_issues_file_line_per_issue(self, tmp_path):
        path = make_csv(tmp_path, ['0,1,25,,text,6,1,0,A,B,C'])
        _, issues = parse_csv(path)
        out = tmp_path / "issues.txt"
        write_issues(issues, out)
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("line 2:")


class TestFilter:
    def make_records(self):
        def rec(i, text):
            return ReviewRecord(
                row_id=i, clothing_id=1, age=30, title=None, review_text=text,
                rating=5, recommended=True, positive_feedback_count=0,
                division=None, department=None, class_name=None,
            )

        return [rec(0, "kept"), rec(1, None), rec(2, "also kept")]

    def test_drops_absent_text(self):
        kept, dropped = filter_for_classification(self.make_records())
        assert [r.row_id for r in kept] == [0, 2]
        assert dropped == 1

    def test_idempotent(self):
        kept, _ = filter_for_classification(self.make_records())
        again, dropped = filter_for_classification(kept)
        assert again == kept
        assert dropped == 0


class TestSplit:
    def test_sizes_ten(self):
        split = split_60_20_20(list(range(10)), seed=1)
        assert split.sizes == (6, 2, 2)

    def test_sizes_eleven_remainder_to_test(self):
        split = split_60_20_20(list(range(11)), seed=1)
        assert split.sizes == (6, 2, 3)

    def test_same_seed_identical(self):
        a = split_60_20_20(list(range(50)), seed=9)
        b = split_60_20_20(list(range(50)), seed=9)
        assert (a.train, a.validation, a.test) == (b.train, b.validation, b.test)

    def test_different_seeds_differ(self):
        a = split_60_20_20(list(range(50)), seed=1)
        b = split_60_20_20(list(range(50)), seed=2)
        assert a.train != b.train

    def test_too_few_records(self):
        with pytest.raises(InputError, match="at least 5"):
            split_60_20_20(list(range(4)), seed=0)

    def test_split_is_shuffled_not_contiguous(self):
        split = split_60_20_20(list(range(100)), seed=3)
        assert tuple(split.train) != tuple(range(60))

    @given(st.integers(5, 400), st.integers(0, 2**32))
    @settings(max_examples=60, deadline=None)
    def test_partition_properties(self, n, seed):
        """Splits are disjoint, exhaustive, and sized by the floor rule."""
        split = split_60_20_20(list(range(n)), seed=seed)
        train, val, test = split.train, split.validation, split.test
        assert len(train) == math.floor(6 * n / 10)
        assert len(val) == math.floor(2 * n / 10)
        assert len(test) == n - len(train) - len(val)
        combined = sorted(train + val + test)
        assert combined == list(range(n))
