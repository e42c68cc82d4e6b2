"""Strict numeric CSV reading with location-bearing parse errors."""

from __future__ import annotations

import csv

import numpy as np

from .exceptions import ParseError


def read_numeric_csv(path: str, has_header: bool = False) -> np.ndarray:
    """Read a rectangular numeric CSV into an (n_rows, n_cols) array.

    Raises ParseError naming the row/column of the first ragged row,
    non-numeric cell or non-finite value.
    """
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if has_header and i == 0:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f"{path}: row {i + 1} has {len(row)} columns, expected {width}"
                )
            parsed = []
            for j, cell in enumerate(row):
                try:
                    val = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {i + 1}, column {j + 1}: not a number: {cell!r}"
                    ) from None
                if not np.isfinite(val):
                    raise ParseError(
                        f"{path}: row {i + 1}, column {j + 1}: non-finite value {cell!r}"
                    )
                parsed.append(val)
            rows.append(parsed)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows)
