import numpy as np
import pytest

from umwkit.datatable import extract_response, numeric_columns, read_table
from umwkit.errors import DomainError


def _write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestReadTable:
    def test_basic(self, tmp_path):
        t = read_table(_write(tmp_path, "y,x\n0.5,1\n0.7,2\n"))
        assert t.header == ("y", "x")
        assert t.n == 2

    def test_quoted_fields(self, tmp_path):
        t = read_table(_write(tmp_path, 'y,"x 1"\n0.5,"1,5"\n'))
        assert t.header == ("y", "x 1")
        assert t.rows[0][1] == "1,5"

    def test_empty_file(self, tmp_path):
        with pytest.raises(DomainError):
            read_table(_write(tmp_path, ""))

    def test_no_data_rows(self, tmp_path):
        with pytest.raises(DomainError):
            read_table(_write(tmp_path, "y,x\n"))

    def test_ragged_row_located(self, tmp_path):
        with pytest.raises(DomainError, match="line 3"):
            read_table(_write(tmp_path, "y,x\n0.5,1\n0.7\n"))

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(DomainError):
            read_table(_write(tmp_path, "y,y\n1,2\n"))

    def test_missing_file(self):
        with pytest.raises(OSError):
            read_table("/no/such/file.csv")


class TestExtractResponse:
    def test_clean(self, tmp_path):
        t = read_table(_write(tmp_path, "y\n0.5\n0.7\n0.2\n"))
        values, kept, dropped = extract_response(t, "y")
        assert np.array_equal(values, [0.5, 0.7, 0.2])
        assert dropped == []

    def test_rejects_invalid_with_line_numbers(self, tmp_path):
        t = read_table(_write(tmp_path, "y\n0.5\n0.0\n0.7\n"))
        with pytest.raises(DomainError, match="line 3"):
            extract_response(t, "y")

    @pytest.mark.parametrize("bad", ["0.0", "1.0", "1.5", "-0.2", "NA", "abc"])
    def test_each_invalid_kind(self, tmp_path, bad):
        t = read_table(_write(tmp_path, f"y\n0.5\n{bad}\n0.7\n"))
        with pytest.raises(DomainError):
            extract_response(t, "y")
        values, kept, dropped = extract_response(t, "y", drop_invalid=True)
        assert np.array_equal(values, [0.5, 0.7])
        assert dropped == [3]
        assert np.array_equal(kept, [0, 2])

    def test_unknown_column(self, tmp_path):
        t = read_table(_write(tmp_path, "y\n0.5\n"))
        with pytest.raises(DomainError, match="no column named"):
            extract_response(t, "z")

    def test_missing_cell_two_columns(self, tmp_path):
        t = read_table(_write(tmp_path, "y,x\n0.5,1\n,2\n0.7,3\n"))
        values, kept, dropped = extract_response(t, "y", drop_invalid=True)
        assert np.array_equal(values, [0.5, 0.7])
        assert dropped == [3]

    def test_blank_lines_keep_file_line_numbers(self, tmp_path):
        t = read_table(_write(tmp_path, "y\n0.5\n\n0.0\n"))
        with pytest.raises(DomainError, match="line 4"):
            extract_response(t, "y")

    def test_all_invalid(self, tmp_path):
        t = read_table(_write(tmp_path, "y\n0.0\n1.0\n"))
        with pytest.raises(DomainError):
            extract_response(t, "y", drop_invalid=True)


class TestNumericColumns:
    def test_respects_kept_rows(self, tmp_path):
        t = read_table(_write(tmp_path, "y,x\n0.5,1\n0.0,999\n0.7,3\n"))
        _, kept, _ = extract_response(t, "y", drop_invalid=True)
        cols = numeric_columns(t, ["x"], kept)
        assert np.array_equal(cols["x"], [1.0, 3.0])

    def test_bad_cell_located(self, tmp_path):
        t = read_table(_write(tmp_path, "y,x\n0.5,1\n0.6,oops\n"))
        _, kept, _ = extract_response(t, "y")
        with pytest.raises(DomainError, match="line 3"):
            numeric_columns(t, ["x"], kept)
