"""CSV / JSON emission for the typed reports."""

from __future__ import annotations

import csv
import json
from typing import IO, Iterable


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.7g}"
    return value


def _row(report) -> dict:
    return {name: _fmt(getattr(report, name)) for name in report.CSV_FIELDS}


def emit_report(report, fmt: str, sink: IO[str]) -> None:
    """Write one report or a sequence of same-typed reports.

    Field order follows each report's ``CSV_FIELDS``; floats carry 7
    significant digits.
    """
    reports = list(report) if isinstance(report, (list, tuple)) else [report]
    if not reports:
        return
    fields = reports[0].CSV_FIELDS
    rows = [_row(r) for r in reports]
    if fmt == "csv":
        writer = csv.DictWriter(sink, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    elif fmt == "json":
        parsed = [{k: (float(v) if isinstance(v, str) else v) for k, v in row.items()} for row in rows]
        json.dump(parsed[0] if len(parsed) == 1 and not isinstance(report, (list, tuple)) else parsed, sink)
        sink.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def emit_rows(rows: Iterable[dict], sink: IO[str]) -> None:
    for row in rows:
        sink.write(json.dumps(row, separators=(",", ":")) + "\n")
