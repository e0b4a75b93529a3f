"""File formats: price-series input, per-block CSV, and JSON documents.

Floats are written with ``repr``, the shortest digit string that parses
back to the exact same double, so every output round-trips bit-exactly and
re-running a command reproduces files byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import astuple, fields
from datetime import datetime
from pathlib import Path

from .dynamics import BlockRecord

BLOCK_COLUMNS = tuple(f.name for f in fields(BlockRecord))


class PriceDataError(ValueError):
    """Malformed or inconsistent historical price input."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


def format_float(value: float) -> str:
    return repr(float(value))


def write_block_records(path: Path | str, records: list[BlockRecord]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(BLOCK_COLUMNS)
        for record in records:
            row = astuple(record)
            writer.writerow([str(row[0])] + [format_float(v) for v in row[1:]])


def read_block_records(path: Path | str) -> list[BlockRecord]:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != BLOCK_COLUMNS:
            raise ValueError(f"unexpected block CSV header {header}")
        return [BlockRecord(int(row[0]), *map(float, row[1:])) for row in reader]


def write_json(path: Path | str, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _parse_timestamp(token: str) -> float:
    token = token.strip()
    try:
        return float(token)
    except ValueError:
        pass
    return datetime.fromisoformat(token.replace("Z", "+00:00")).timestamp()


def read_price_series(path: Path | str) -> list[tuple[float, float]]:
    """Parse ``timestamp,price`` lines into an ordered series.

    Timestamps may be numeric epochs or ISO-8601; a single header line is
    detected and skipped. Errors carry 1-based line numbers. Timestamps must
    be strictly increasing and prices strictly positive.
    """
    series: list[tuple[float, float]] = []
    with open(path, newline="") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise PriceDataError(
                    f"expected 'timestamp,price', got {line!r}", line_number
                )
            try:
                ts = _parse_timestamp(parts[0])
                price = float(parts[1])
            except ValueError:
                if line_number == 1 and not series:
                    continue  # header row
                raise PriceDataError(f"could not parse {line!r}", line_number)
            if not price > 0.0:
                raise PriceDataError(f"price must be positive, got {price}", line_number)
            if series and ts <= series[-1][0]:
                raise PriceDataError(
                    f"timestamp {parts[0].strip()} is not after the previous row", line_number
                )
            series.append((ts, price))
    if not series:
        raise PriceDataError("no price rows found")
    return series
