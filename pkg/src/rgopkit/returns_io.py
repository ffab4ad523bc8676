"""Ingestion of monthly return tables.

Expected layout: a header row naming the assets, then one row per month of
(YYYYMM, v_1, ..., v_N) with values in percent.  Values are converted to
decimals.  Rows holding a missing-data sentinel (any value <= -99) are
dropped.  Blank lines and lines starting with '#' are ignored.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple

import numpy as np

from .errors import (
    EmptyFile,
    InconsistentColumnCount,
    MalformedRow,
    RgopIOError,
)

_SENTINEL = -99.0


def _is_date_token(tok: str) -> bool:
    if len(tok) != 6 or not tok.isdigit():
        return False
    return 1 <= int(tok[4:6]) <= 12


def parse_returns_csv(path) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Parse a percent-unit return table into a decimal K x N matrix plus
    the asset labels from the header."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RgopIOError(f"cannot read {path}: {exc}") from exc

    labels: Tuple[str, ...] = ()
    rows: List[List[float]] = []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = [t.strip() for t in line.split(",")]
        if not saw_header:
            if _is_date_token(tokens[0]):
                raise MalformedRow(
                    f"line {lineno}: expected a header row, found data",
                    line_number=lineno,
                )
            if len(tokens) < 2:
                raise MalformedRow(
                    f"line {lineno}: header needs a date column and at "
                    "least one asset",
                    line_number=lineno,
                )
            labels = tuple(tokens[1:])
            saw_header = True
            continue
        if len(tokens) != len(labels) + 1:
            raise InconsistentColumnCount(
                f"line {lineno}: expected {len(labels) + 1} columns, "
                f"found {len(tokens)}"
            )
        if not _is_date_token(tokens[0]):
            raise MalformedRow(
                f"line {lineno}: first field {tokens[0]!r} is not a "
                "YYYYMM date",
                line_number=lineno,
            )
        try:
            values = [float(t) for t in tokens[1:]]
        except ValueError as exc:
            raise MalformedRow(
                f"line {lineno}: {exc}", line_number=lineno
            ) from exc
        if min(values) <= _SENTINEL:
            continue
        rows.append(values)

    if not saw_header:
        raise EmptyFile(f"{path} holds no header row")
    if not rows:
        raise EmptyFile(f"{path} holds no usable data rows")
    return np.asarray(rows, dtype=float) / 100.0, labels
