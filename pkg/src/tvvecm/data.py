"""CSV ingestion.

The file needs a header row.  A leading date column is detected from its
header (``date``, ``time``, ``period``, ...) or from its first cell
(ISO-8601 dates such as ``1961-06-01`` or ``1961-06``, or ``1961:M06`` /
``1961M6``).  All other columns must be numeric.
"""
import csv
import re
import sys

import numpy as np

from .errors import DataError, ParseError, TooFewObservations
from .tvestim import Panel

_DATE_HEADERS = {"date", "time", "period", "month", "t", "obs"}
_DATE_RE = re.compile(
    r"^\d{4}(-\d{1,2}(-\d{1,2}([T ][\d:.]+)?)?|:?M\d{1,2}|:?Q[1-4])$", re.IGNORECASE)


def looks_like_date(cell):
    return bool(_DATE_RE.match(cell.strip()))


def _to_float(cell, row, col):
    try:
        v = float(cell)
    except ValueError:
        v = None
    if v is None or not np.isfinite(v):
        raise ParseError(f"row {row}, column {col!r}: cannot read {cell!r} as a number",
                         row=row, column=col)
    return v


def read_csv(path):
    """Header and data rows of a UTF-8 CSV file (blank lines skipped); ``-`` is stdin."""
    try:
        if str(path) == "-":
            rows = [r for r in csv.reader(sys.stdin) if any(c.strip() for c in r)]
        else:
            with open(path, newline="", encoding="utf-8-sig") as fh:
                rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path} is not UTF-8: {exc}") from exc
    if not rows:
        raise ParseError(f"{path} is empty", row=0)
    return [c.strip() for c in rows[0]], rows[1:]


def load_panel(path, columns=None, order=None, min_rows=2):
    """Read a panel from CSV.

    Parameters
    ----------
    path : str or path-like
    columns : sequence of str, optional
        Series to keep (default: every non-date column).
    order : sequence of str or int, optional
        Final column order; the first ``r`` columns form the normalised block
        of the cointegrating matrix.  A comma-separated string is accepted.
    min_rows : int
        Fewer data rows raise :class:`TooFewObservations`.

    Rows are numbered from 1 after the header in error messages.
    """
    header, body = read_csv(path)
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", row=0)
    first = body[0][0] if body and body[0] else ""
    has_date = header[0].lower() in _DATE_HEADERS or looks_like_date(first)
    series = header[1:] if has_date else header
    if not series:
        raise ParseError("no numeric columns", row=0)
    labels, values = [], []
    for i, raw in enumerate(body, start=1):
        if len(raw) != len(header):
            raise ParseError(f"row {i} has {len(raw)} fields, expected {len(header)}", row=i)
        cells = raw[1:] if has_date else raw
        if has_date:
            labels.append(raw[0].strip())
        values.append([_to_float(c, i, name) for c, name in zip(cells, series)])
    if len(values) < min_rows:
        raise TooFewObservations(f"{len(values)} data rows, need at least {min_rows}")
    panel = Panel(np.array(values, dtype=float), tuple(series),
                  tuple(labels) if has_date else None)
    if columns is not None:
        missing = [c for c in columns if c not in panel.columns]
        if missing:
            raise DataError(f"unknown columns {missing}")
        idx = [panel.columns.index(c) for c in columns]
        panel = Panel(panel.values[:, idx], tuple(columns), panel.labels)
    if order is not None:
        if isinstance(order, str):
            order = [o.strip() for o in order.split(",") if o.strip()]
        panel = panel.reorder(order)
    return panel


def write_panel(path, panel, date_labels=None):
    """Write a panel as CSV, with an optional leading ``date`` column."""
    labels = date_labels if date_labels is not None else panel.labels
    if str(path) == "-":
        _write_rows(sys.stdout, panel, labels)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, panel, labels)


def _write_rows(fh, panel, labels):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow((["date"] if labels else []) + list(panel.columns))
    for i, row in enumerate(panel.values):
        w.writerow(([labels[i]] if labels else []) + [repr(float(v)) for v in row])
