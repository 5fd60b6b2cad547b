"""CSV persistence for trial records, cell summaries and catalogs.

Floats are written with ``repr`` so a file read back reproduces the exact
values, and the RSNR sentinel for exact recovery is the literal ``inf``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Sequence, TextIO

from ..errors import RecordSchemaError

try:  # dual import roots for tests vs runtime
    from engine.catalog import CatalogRow, CellSummary  # type: ignore
    from engine.executor import TrialRecord  # type: ignore
except ModuleNotFoundError:  # pragma: no cover
    from backend.engine.catalog import CatalogRow, CellSummary  # type: ignore
    from backend.engine.executor import TrialRecord  # type: ignore

logger = logging.getLogger("qcsbench.records")

RECORD_SCHEMA_VERSION = "1"
RECORD_COLUMNS = (
    "schema_version",
    "algorithm",
    "bit_depth",
    "total_bits",
    "m",
    "n",
    "k",
    "isnr_db",
    "corruption",
    "trial",
    "seed",
    "rsnr_db",
    "iterations",
    "mismatch",
    "runtime_ms",
)
SUMMARY_COLUMNS = (
    "algorithm",
    "bit_depth",
    "total_bits",
    "m",
    "n",
    "k",
    "isnr_db",
    "corruption",
    "trials",
    "mean_rsnr_db",
    "stderr_rsnr_db",
    "mean_iterations",
    "mean_mismatch",
)
CATALOG_TRAILER = ("best_algorithm", "best_bit_depth", "best_mean_rsnr_db", "candidates")


def format_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def _writer(stream: TextIO):
    return csv.writer(stream, lineterminator="\n")


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = _writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1
    logger.info("Wrote %d rows to %s", count, path)
    return count


def record_row(record: TrialRecord) -> List[object]:
    return [RECORD_SCHEMA_VERSION] + [getattr(record, name) for name in RECORD_COLUMNS[1:]]


def records_to_csv(records: Iterable[TrialRecord], include_header: bool = True) -> str:
    buffer = io.StringIO()
    writer = _writer(buffer)
    if include_header:
        writer.writerow(RECORD_COLUMNS)
    for record in records:
        writer.writerow([format_value(value) for value in record_row(record)])
    return buffer.getvalue()


def write_records(path: Path, records: Iterable[TrialRecord]) -> int:
    return _write_rows(path, RECORD_COLUMNS, (record_row(record) for record in records))


def write_summary(path: Path, summaries: Iterable[CellSummary]) -> int:
    return _write_rows(
        path,
        SUMMARY_COLUMNS,
        ([getattr(summary, name) for name in SUMMARY_COLUMNS] for summary in summaries),
    )


def write_catalog(path: Path, rows: Sequence[CatalogRow]) -> int:
    fields = [name for name, _ in rows[0].group] if rows else []
    return _write_rows(
        path,
        (*fields, *CATALOG_TRAILER),
        (
            [value for _, value in row.group]
            + [row.best_algorithm, row.best_bit_depth, row.best_mean_rsnr_db, row.candidates]
            for row in rows
        ),
    )


def _read_table(path: Path, required: Sequence[str]) -> List[Dict[str, str]]:
    try:
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            rows = list(reader)
    except OSError as exc:
        raise RecordSchemaError(f"cannot read {path}: {exc}") from exc
    for column in required:
        if column not in header:
            raise RecordSchemaError(f"{path}: missing column {column!r}", column=column)
    return rows


def _convert(row: Dict[str, str], column: str, kind: Callable[[str], object], line: int) -> object:
    raw = row.get(column, "")
    try:
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise RecordSchemaError(f"row {line}: bad value {raw!r} in column {column!r}", column=column) from exc


RECORD_TYPES: Dict[str, Callable[[str], object]] = {
    "algorithm": str,
    "bit_depth": int,
    "total_bits": int,
    "m": int,
    "n": int,
    "k": int,
    "isnr_db": float,
    "corruption": float,
    "trial": int,
    "seed": int,
    "rsnr_db": float,
    "iterations": int,
    "mismatch": int,
    "runtime_ms": lambda raw: float(raw) if raw else None,
}

SUMMARY_TYPES: Dict[str, Callable[[str], object]] = {
    "algorithm": str,
    "bit_depth": int,
    "total_bits": int,
    "m": int,
    "n": int,
    "k": int,
    "isnr_db": float,
    "corruption": float,
    "trials": int,
    "mean_rsnr_db": float,
    "stderr_rsnr_db": float,
    "mean_iterations": float,
    "mean_mismatch": float,
}


def read_records(path: Path) -> List[TrialRecord]:
    rows = _read_table(path, RECORD_COLUMNS)
    records = []
    for line, row in enumerate(rows, start=2):
        if row["schema_version"] != RECORD_SCHEMA_VERSION:
            raise RecordSchemaError(
                f"row {line}: schema_version {row['schema_version']!r} is not {RECORD_SCHEMA_VERSION!r}",
                column="schema_version",
            )
        values = {column: _convert(row, column, kind, line) for column, kind in RECORD_TYPES.items()}
        records.append(TrialRecord(**values))  # type: ignore[arg-type]
    logger.debug("Read %d records from %s", len(records), path)
    return records


def read_summary(path: Path) -> List[CellSummary]:
    rows = _read_table(path, SUMMARY_COLUMNS)
    return [
        CellSummary(**{column: _convert(row, column, kind, line) for column, kind in SUMMARY_TYPES.items()})  # type: ignore[arg-type]
        for line, row in enumerate(rows, start=2)
    ]


def read_catalog(path: Path) -> List[Dict[str, str]]:
    return _read_table(path, CATALOG_TRAILER)


__all__ = [
    "RECORD_COLUMNS",
    "SUMMARY_COLUMNS",
    "format_value",
    "read_catalog",
    "read_records",
    "read_summary",
    "records_to_csv",
    "write_catalog",
    "write_records",
    "write_summary",
]
