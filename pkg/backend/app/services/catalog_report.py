from __future__ import annotations

import logging
from collections import OrderedDict
from typing import Dict, List, Sequence, Tuple

from .records import format_value

try:  # dual import roots for tests vs runtime
    from engine.catalog import CatalogRow  # type: ignore
except ModuleNotFoundError:  # pragma: no cover
    from backend.engine.catalog import CatalogRow  # type: ignore

logger = logging.getLogger("qcsbench.catalog")


def cell_label(row: CatalogRow) -> str:
    return f"{row.best_algorithm}/B{row.best_bit_depth} ({format_value(round(row.best_mean_rsnr_db, 1))})"


def _section_title(fields: Sequence[str], values: Sequence[object]) -> str:
    if not fields:
        return "all records"
    return ", ".join(f"{name}={format_value(value)}" for name, value in zip(fields, values))


def render_table(rows: Sequence[CatalogRow]) -> str:
    """Text grids of the winning pair, one grid per value of the outer grouping fields.

    The last two grouping fields span the rows and columns of each grid; a
    single field gives a one-column grid.
    """

    if not rows:
        return "(empty catalog)\n"
    fields = [name for name, _ in rows[0].group]
    outer, inner = fields[:-2], fields[-2:]
    sections: "OrderedDict[tuple, List[CatalogRow]]" = OrderedDict()
    for row in rows:
        sections.setdefault(tuple(row.value(name) for name in outer), []).append(row)

    blocks = []
    for key, members in sections.items():
        blocks.append(_render_grid(_section_title(outer, key), inner, members))
    return "\n".join(blocks)


def _render_grid(title: str, inner: Sequence[str], members: Sequence[CatalogRow]) -> str:
    row_field = inner[0] if inner else None
    column_field = inner[1] if len(inner) > 1 else None
    row_keys: List[object] = []
    column_keys: List[object] = []
    cells: Dict[Tuple[object, object], str] = {}
    for row in members:
        row_key = row.value(row_field) if row_field else ""
        column_key = row.value(column_field) if column_field else "best"
        if row_key not in row_keys:
            row_keys.append(row_key)
        if column_key not in column_keys:
            column_keys.append(column_key)
        cells[(row_key, column_key)] = cell_label(row)

    corner = f"{row_field}\\{column_field}" if column_field else (row_field or "")
    header = [corner] + [format_value(key) for key in column_keys]
    table = [header] + [
        [format_value(row_key)] + [cells.get((row_key, column_key), "-") for column_key in column_keys]
        for row_key in row_keys
    ]
    widths = [max(len(line[index]) for line in table) for index in range(len(header))]
    lines = [f"== {title} =="]
    for line in table:
        lines.append("  ".join(text.ljust(width) for text, width in zip(line, widths)).rstrip())
    return "\n".join(lines) + "\n"


__all__ = ["cell_label", "render_table"]
