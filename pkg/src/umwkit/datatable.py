"""CSV ingestion for the CLI: header-labelled tables with row-located errors.

Files are RFC-4180-style, UTF-8, '.' decimal separator, header row required.
Line numbers in messages count the header as line 1.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["InputTable", "read_table", "extract_response", "numeric_columns"]

_MISSING = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class InputTable:
    path: str
    header: tuple
    rows: tuple  # of row tuples (raw strings)
    line_numbers: tuple  # file line of each row (header = line 1)

    @property
    def n(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.header.index(name)
        except ValueError:
            raise DomainError(
                f"{self.path}: no column named {name!r}; have {', '.join(self.header)}"
            ) from None


def read_table(path) -> InputTable:
    """Parse a CSV file; structural problems raise DomainError with line info."""
    path = str(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty file, header row required") from None
        header = tuple(h.strip() for h in header)
        if any(not h for h in header):
            raise DomainError(f"{path}: header contains an empty column name")
        if len(set(header)) != len(header):
            raise DomainError(f"{path}: duplicate column names in header")
        rows = []
        lines = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # blank line
            if len(row) != len(header):
                raise DomainError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append(tuple(cell.strip() for cell in row))
            lines.append(lineno)
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return InputTable(path=path, header=header, rows=tuple(rows),
                      line_numbers=tuple(lines))


def _parse_cell(cell: str):
    """float value, or None for a missing/unparseable cell."""
    if cell.lower() in _MISSING:
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def extract_response(table: InputTable, name: str, drop_invalid: bool = False):
    """Response column restricted to the open unit interval.

    Returns (values, kept_row_positions, dropped_line_numbers).  A row is
    invalid when the response is missing, unparseable, <= 0, or >= 1;
    without drop_invalid the first few offenders are reported and the whole
    read fails.
    """
    col = table.column_index(name)
    values, kept, dropped, problems = [], [], [], []
    for pos, row in enumerate(table.rows):
        lineno = table.line_numbers[pos]
        v = _parse_cell(row[col])
        if v is None or v <= 0.0 or v >= 1.0:
            dropped.append(lineno)
            problems.append(f"line {lineno}: response {name}={row[col]!r}")
        else:
            values.append(v)
            kept.append(pos)
    if problems and not drop_invalid:
        shown = "; ".join(problems[:5])
        more = f" (+{len(problems) - 5} more)" if len(problems) > 5 else ""
        raise DomainError(
            f"{table.path}: invalid response rows (must be strictly in (0,1)): "
            f"{shown}{more}; pass --drop-invalid to drop them"
        )
    if not values:
        raise DomainError(f"{table.path}: no valid response rows remain")
    return np.array(values), np.array(kept, dtype=int), dropped


def numeric_columns(table: InputTable, names, kept_rows) -> dict:
    """Parse the named covariate columns at the kept row positions."""
    out = {}
    for name in names:
        col = table.column_index(name)
        vals = np.empty(len(kept_rows))
        for i, pos in enumerate(kept_rows):
            v = _parse_cell(table.rows[pos][col])
            if v is None:
                raise DomainError(
                    f"{table.path}: line {table.line_numbers[pos]}: column {name!r}: "
                    f"cannot parse {table.rows[pos][col]!r} as a number"
                )
            vals[i] = v
        out[name] = vals
    return out
