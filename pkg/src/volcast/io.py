"""CSV ingestion of ``date,close`` price files and CSV/JSON export helpers."""
from __future__ import annotations

import csv
import datetime as dt
import io
import os
import warnings
from typing import Iterable, Sequence

import numpy as np

from volcast.exceptions import DataWarning, VolcastError
from volcast.series import CorrelogramResult, PriceSeries

__all__ = [
    "CSVFormatError",
    "read_prices_csv",
    "write_prices_csv",
    "write_rows_csv",
    "write_correlogram_csv",
    "format_float",
    "sig6",
]


class CSVFormatError(VolcastError, ValueError):
    """An input CSV could not be parsed; ``row`` and ``column`` locate the problem."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row = row
        self.column = column


def format_float(x: float) -> str:
    """Shortest representation that round-trips exactly."""
    return repr(float(x))


def sig6(x):
    """Round to 6 significant digits for report output; passes ``None`` through."""
    if x is None:
        return None
    x = float(x)
    if not np.isfinite(x):
        return None
    return float(f"{x:.6g}")


def read_prices_csv(path: str | os.PathLike) -> PriceSeries:
    """
    Read a ``date,close`` CSV into a :class:`PriceSeries`.

    Rows out of chronological order are sorted with a :class:`DataWarning`.
    Duplicate dates, unparseable dates and non-numeric or non-positive closes
    raise :class:`CSVFormatError` naming the offending row (1-based, header is
    row 1) and column.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError("file is empty", row=1) from None
        header = [h.strip().lower() for h in header]
        if header[:2] != ["date", "close"]:
            raise CSVFormatError(f"expected header 'date,close', got {','.join(header)!r}", row=1)
        dates: list[dt.date] = []
        closes: list[float] = []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise CSVFormatError("expected 2 fields", row=rowno)
            try:
                d = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise CSVFormatError(f"invalid ISO-8601 date {row[0]!r}", rowno, "date") from None
            try:
                c = float(row[1])
            except ValueError:
                raise CSVFormatError(f"invalid number {row[1]!r}", rowno, "close") from None
            if not (np.isfinite(c) and c > 0):
                raise CSVFormatError(f"close must be positive, got {row[1]!r}", rowno, "close")
            dates.append(d)
            closes.append(c)

    if len(closes) < 2:
        raise CSVFormatError(f"need at least 2 data rows, got {len(closes)}")
    order = sorted(range(len(dates)), key=dates.__getitem__)
    if order != list(range(len(dates))):
        warnings.warn("rows were not in ascending date order and have been sorted", DataWarning, stacklevel=2)
        dates = [dates[i] for i in order]
        closes = [closes[i] for i in order]
    for i in range(1, len(dates)):
        if dates[i] == dates[i - 1]:
            raise CSVFormatError(f"duplicate date {dates[i].isoformat()}", column="date")
    return PriceSeries(np.array(closes), tuple(dates))


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_prices_csv(path, prices: PriceSeries) -> None:
    if prices.dates is None:
        raise ValueError("price series has no dates")
    _write(path, ["date", "close"], ((d.isoformat(), float(v)) for d, v in zip(prices.dates, prices.values)))


def write_rows_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    _write(path, header, rows)


def write_correlogram_csv(path, result: CorrelogramResult) -> None:
    _write(path, ["lag", "coefficient", "band"], result.rows())
