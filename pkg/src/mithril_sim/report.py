"""CSV and JSON-lines output.

CSV files start with ``# key=value`` lines carrying every configuration
knob, then a header row. JSON-lines files start with one
``{"record": "config", ...}`` object followed by one object per row.
Counters are exact integers; ratios are computed when written.
"""
from __future__ import annotations

import csv
import json
from typing import IO, Iterable, Sequence

from .simulator import SimulationReport

REPORT_FIELDS = (
    "algorithm", "capacity_blocks", "effective_capacity", "metadata_charge_blocks",
    "requests", "hits", "misses", "cold_misses", "hit_ratio", "max_obtainable_hit_ratio",
    "prefetch_candidates", "prefetches_issued", "prefetched_used", "precision",
    "prefetched_evicted_unused", "second_chances", "metadata_bytes",
    "mithril_issued", "mithril_used", "amp_issued", "amp_used", "pg_issued", "pg_used",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def write_header(fh: IO[str], header: dict) -> None:
    for key in header:
        fh.write(f"# {key}={_fmt(header[key])}\n")


def write_rows_csv(fh: IO[str], fields: Sequence[str], rows: Iterable[Sequence], header: dict | None = None) -> None:
    if header:
        write_header(fh, header)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def write_rows_jsonl(fh: IO[str], fields: Sequence[str], rows: Iterable[Sequence], header: dict | None = None,
                     record: str = "row") -> None:
    if header is not None:
        fh.write(json.dumps({"record": "config", **header}, sort_keys=False) + "\n")
    for row in rows:
        fh.write(json.dumps({"record": record, **dict(zip(fields, row))}) + "\n")


def report_rows(reports: Iterable[SimulationReport]) -> list[list]:
    rows = []
    for r in reports:
        d = r.to_dict()
        rows.append([d[f] for f in REPORT_FIELDS])
    return rows


def write_reports(fh: IO[str], reports: Iterable[SimulationReport], header: dict, fmt: str = "csv") -> None:
    rows = report_rows(reports)
    if fmt == "jsonl":
        write_rows_jsonl(fh, REPORT_FIELDS, rows, header, record="report")
    else:
        write_rows_csv(fh, REPORT_FIELDS, rows, header)


def summary_line(report: SimulationReport) -> str:
    return (f"{report.algorithm}: hit_ratio={report.hit_ratio:.4f} precision={report.precision:.4f} "
            f"metadata_bytes={report.metadata_bytes} requests={report.requests}")
