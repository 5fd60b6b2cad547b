"""SVG figures rendered through Jinja2 templates.

``render_curves`` draws mean RSNR against total bits (or corruption percent),
one polyline per algorithm and bit depth. ``render_best_map`` places one marker
per catalog cell, colored by the winning algorithm and shaped by its bit depth.
All coordinates are formatted with fixed precision so the bytes only depend on
the input rows.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from jinja2 import Environment, FileSystemLoader, select_autoescape

from ..config import get_settings
from ..errors import ConfigError, RecordSchemaError
from .records import format_value

try:  # dual import roots for tests vs runtime
    from engine.catalog import CellSummary  # type: ignore
    from engine.executor import algorithm_rank  # type: ignore
except ModuleNotFoundError:  # pragma: no cover
    from backend.engine.catalog import CellSummary  # type: ignore
    from backend.engine.executor import algorithm_rank  # type: ignore

logger = logging.getLogger("qcsbench.plot")

ALGORITHM_COLORS = {
    "qiht": "#d62728",
    "aop-qiht": "#ff00ff",
    "qcosamp": "#2ca02c",
    "qsp": "#1f77b4",
    "iht": "#ff7f0e",
    "biht": "#8c564b",
    "cosamp": "#17becf",
    "sp": "#7f7f7f",
}
ALGORITHM_LABELS = {"qiht": "QIHT", "aop-qiht": "AOP-QIHT", "qcosamp": "QCoSaMP", "qsp": "QSP"}
BIT_DEPTH_MARKERS = {1: "circle", 2: "square", 3: "triangle", 4: "star"}
FALLBACK_COLOR = "#000000"
FALLBACK_MARKER = "diamond"

WIDTH = 720
HEIGHT = 480
MARGIN = {"left": 70, "right": 190, "top": 40, "bottom": 60}
MARKER_SIZE = 5.0
X_AXES = {"total_bits": "Total bits", "corruption": "Corruption (%)"}
MAP_Y_AXES = {"k": "Sparsity K", "isnr_db": "ISNR (dB)"}


def color_for(algorithm: str) -> str:
    return ALGORITHM_COLORS.get(algorithm, FALLBACK_COLOR)


def marker_for(bit_depth: int) -> str:
    return BIT_DEPTH_MARKERS.get(bit_depth, FALLBACK_MARKER)


def label_for(algorithm: str) -> str:
    return ALGORITHM_LABELS.get(algorithm, algorithm.upper())


def _num(value: float) -> str:
    return f"{value:.2f}"


def marker_shape(shape: str, x: float, y: float, size: float = MARKER_SIZE) -> Dict[str, str]:
    """Template-ready description of a marker centred on (x, y)."""

    if shape == "circle":
        return {"tag": "circle", "cx": _num(x), "cy": _num(y), "r": _num(size)}
    if shape == "square":
        return {"tag": "rect", "x": _num(x - size), "y": _num(y - size), "side": _num(2 * size)}
    if shape == "triangle":
        vertices = [(x, y - size * 1.2), (x + size * 1.1, y + size * 0.8), (x - size * 1.1, y + size * 0.8)]
    elif shape == "star":
        vertices = []
        for index in range(10):
            radius = size * 1.3 if index % 2 == 0 else size * 0.55
            angle = -math.pi / 2 + index * math.pi / 5
            vertices.append((x + radius * math.cos(angle), y + radius * math.sin(angle)))
    else:
        vertices = [(x, y - size * 1.2), (x + size, y), (x, y + size * 1.2), (x - size, y)]
    return {"tag": "polygon", "points": " ".join(f"{_num(px)},{_num(py)}" for px, py in vertices)}


@dataclass
class Axis:
    low: float
    high: float
    pixel_low: float
    pixel_high: float
    ticks: List[float] = field(default_factory=list)

    def scale(self, value: float) -> float:
        if self.high == self.low:
            return (self.pixel_low + self.pixel_high) / 2.0
        fraction = (value - self.low) / (self.high - self.low)
        return self.pixel_low + fraction * (self.pixel_high - self.pixel_low)


def _nice_step(span: float, target: int = 6) -> float:
    if span <= 0:
        return 1.0
    raw = span / target
    magnitude = 10 ** math.floor(math.log10(raw))
    for factor in (1, 2, 5, 10):
        if factor * magnitude >= raw:
            return factor * magnitude
    return 10 * magnitude


def value_axis(values: Sequence[float], pixel_low: float, pixel_high: float) -> Axis:
    low, high = min(values), max(values)
    if low == high:
        low, high = low - 5.0, high + 5.0
    step = _nice_step(high - low)
    low = math.floor(low / step) * step
    high = math.ceil(high / step) * step
    count = int(round((high - low) / step))
    return Axis(low, high, pixel_low, pixel_high, [low + index * step for index in range(count + 1)])


def category_axis(values: Sequence[float], pixel_low: float, pixel_high: float) -> Axis:
    """Linear axis ticked at the distinct data values."""

    distinct = sorted(set(values))
    low, high = distinct[0], distinct[-1]
    ticks = distinct if len(distinct) <= 12 else value_axis(distinct, pixel_low, pixel_high).ticks
    return Axis(low, high, pixel_low, pixel_high, list(ticks))


def _tick_label(value: float) -> str:
    if math.isinf(value):
        return "inf"
    if float(value).is_integer():
        return str(int(value))
    return f"{value:g}"


def _environment(template_dir: Path | None = None) -> Environment:
    environment = Environment(
        loader=FileSystemLoader(str(template_dir or get_settings().template_dir)),
        autoescape=select_autoescape(["svg", "j2", "xml"]),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    settings = get_settings()
    environment.globals.update({"app_name": settings.app_name, "app_version": settings.version})
    return environment


@dataclass(frozen=True)
class CurveFilter:
    algorithms: Optional[Sequence[str]] = None
    bit_depths: Optional[Sequence[int]] = None
    k: Optional[int] = None
    isnr_db: Optional[float] = None
    n: Optional[int] = None
    total_bits: Optional[int] = None
    corruption: Optional[float] = None

    def accepts(self, summary: CellSummary) -> bool:
        if self.algorithms and summary.algorithm not in self.algorithms:
            return False
        if self.bit_depths and summary.bit_depth not in self.bit_depths:
            return False
        for name in ("k", "isnr_db", "n", "total_bits", "corruption"):
            wanted = getattr(self, name)
            if wanted is not None and getattr(summary, name) != wanted:
                return False
        return True


def _x_value(summary: CellSummary, x_field: str) -> float:
    if x_field == "corruption":
        return round(summary.corruption * 100.0, 9)
    return float(summary.total_bits)


def build_curves(
    summaries: Iterable[CellSummary],
    x_field: str = "total_bits",
    ceiling_db: float | None = None,
    selection: CurveFilter | None = None,
) -> Dict[str, object]:
    if x_field not in X_AXES:
        raise ConfigError(f"cannot plot against {x_field!r}; choose from {', '.join(X_AXES)}")
    ceiling = get_settings().plot_ceiling_db if ceiling_db is None else ceiling_db
    selection = selection or CurveFilter()
    rows = [summary for summary in summaries if selection.accepts(summary)]
    if not rows:
        raise ConfigError("no rows after filtering")

    # dimensions other than the x axis that still vary split the series further
    free = [name for name in ("k", "isnr_db", "n", "corruption", "total_bits") if name != x_field]
    varying = [name for name in free if len({getattr(row, name) for row in rows}) > 1]
    grouped: Dict[tuple, List[CellSummary]] = {}
    for row in rows:
        key = (algorithm_rank(row.algorithm), row.algorithm, row.bit_depth) + tuple(
            getattr(row, name) for name in varying
        )
        grouped.setdefault(key, []).append(row)

    def clipped(value: float) -> float:
        if math.isnan(value):
            return -ceiling
        return max(min(value, ceiling), -ceiling)

    x_axis = category_axis([_x_value(row, x_field) for row in rows], MARGIN["left"], WIDTH - MARGIN["right"])
    y_axis = value_axis([clipped(row.mean_rsnr_db) for row in rows], HEIGHT - MARGIN["bottom"], MARGIN["top"])

    series = []
    for key in sorted(grouped):
        members = sorted(grouped[key], key=lambda row: _x_value(row, x_field))
        _, algorithm, bit_depth = key[:3]
        extra = ", ".join(f"{name}={format_value(value)}" for name, value in zip(varying, key[3:]))
        points = []
        for row in members:
            px = x_axis.scale(_x_value(row, x_field))
            py = y_axis.scale(clipped(row.mean_rsnr_db))
            points.append(
                {
                    "x": _num(px),
                    "y": _num(py),
                    "marker": marker_shape(marker_for(bit_depth), px, py),
                    "title": f"{format_value(row.mean_rsnr_db)} dB over {row.trials} trials",
                    "clipped": row.mean_rsnr_db > ceiling,
                }
            )
        series.append(
            {
                "label": f"{label_for(algorithm)} B={bit_depth}" + (f" ({extra})" if extra else ""),
                "color": color_for(algorithm),
                "marker": marker_for(bit_depth),
                "polyline": " ".join(f"{point['x']},{point['y']}" for point in points),
                "points": points,
            }
        )
    logger.debug("Built %d series from %d summary rows", len(series), len(rows))
    return {
        "width": WIDTH,
        "height": HEIGHT,
        "margin": MARGIN,
        "title": f"Mean RSNR vs {X_AXES[x_field].lower()}",
        "x_label": X_AXES[x_field],
        "y_label": "Mean RSNR (dB)",
        "x_ticks": [{"at": _num(x_axis.scale(tick)), "label": _tick_label(tick)} for tick in x_axis.ticks],
        "y_ticks": [{"at": _num(y_axis.scale(tick)), "label": _tick_label(tick)} for tick in y_axis.ticks],
        "ceiling": _num(ceiling),
        "series": series,
        "legend": [
            {
                "label": entry["label"],
                "color": entry["color"],
                "y": _num(MARGIN["top"] + 18 * index),
                "marker": marker_shape(entry["marker"], WIDTH - MARGIN["right"] + 22, MARGIN["top"] + 18 * index - 4),
            }
            for index, entry in enumerate(series)
        ],
        "legend_x": _num(WIDTH - MARGIN["right"] + 34),
    }


def render_curves(
    summaries: Iterable[CellSummary],
    x_field: str = "total_bits",
    ceiling_db: float | None = None,
    selection: CurveFilter | None = None,
    template_dir: Path | None = None,
) -> str:
    context = build_curves(summaries, x_field, ceiling_db, selection)
    return _environment(template_dir).get_template("curves.svg.j2").render(**context)


def _catalog_float(row: Mapping[str, str], column: str) -> float:
    try:
        return float(row[column])
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordSchemaError(f"catalog column {column!r} missing or not numeric", column=column) from exc


def build_best_map(
    rows: Sequence[Mapping[str, str]],
    y_field: str = "k",
    filters: Mapping[str, float] | None = None,
) -> Dict[str, object]:
    if y_field not in MAP_Y_AXES:
        raise ConfigError(f"cannot map against {y_field!r}; choose from {', '.join(MAP_Y_AXES)}")
    for column in ("total_bits", y_field, "best_algorithm", "best_bit_depth"):
        if rows and column not in rows[0]:
            raise RecordSchemaError(f"catalog has no column {column!r}", column=column)
    selected = [
        row
        for row in rows
        if all(column not in row or _catalog_float(row, column) == value for column, value in (filters or {}).items())
    ]
    if not selected:
        raise ConfigError("no rows after filtering")

    cells: Dict[tuple, Mapping[str, str]] = {}
    for row in selected:
        key = (_catalog_float(row, "total_bits"), _catalog_float(row, y_field))
        if key in cells:
            raise ConfigError(
                f"several catalog rows share total_bits={_tick_label(key[0])}, {y_field}={_tick_label(key[1])}; "
                "narrow the selection"
            )
        cells[key] = row

    x_axis = category_axis([key[0] for key in cells], MARGIN["left"] + 20, WIDTH - MARGIN["right"] - 20)
    y_values = sorted({key[1] for key in cells})
    # inf (noiseless) sits one slot above the largest finite ISNR
    slots = {value: index for index, value in enumerate(y_values)}
    y_axis = Axis(0, max(len(y_values) - 1, 1), HEIGHT - MARGIN["bottom"] - 20, MARGIN["top"] + 20)
    markers = []
    for (x_value, y_value), row in sorted(cells.items()):
        algorithm = row["best_algorithm"]
        bit_depth = int(_catalog_float(row, "best_bit_depth"))
        px, py = x_axis.scale(x_value), y_axis.scale(slots[y_value])
        markers.append(
            {
                "shape": marker_shape(marker_for(bit_depth), px, py, MARKER_SIZE * 1.4),
                "color": color_for(algorithm),
                "title": f"{label_for(algorithm)} B={bit_depth}: {row.get('best_mean_rsnr_db', '')} dB",
            }
        )
    present_algorithms = sorted({row["best_algorithm"] for row in cells.values()}, key=algorithm_rank)
    present_depths = sorted({int(_catalog_float(row, "best_bit_depth")) for row in cells.values()})
    entries = [(label_for(name), color_for(name), "square") for name in present_algorithms] + [
        (f"B={depth}", FALLBACK_COLOR, marker_for(depth)) for depth in present_depths
    ]
    legend = [
        {
            "label": label,
            "color": color,
            "y": _num(MARGIN["top"] + 18 * index),
            "marker": marker_shape(shape, WIDTH - MARGIN["right"] + 22, MARGIN["top"] + 18 * index - 4),
        }
        for index, (label, color, shape) in enumerate(entries)
    ]
    return {
        "width": WIDTH,
        "height": HEIGHT,
        "margin": MARGIN,
        "title": "Best algorithm and bit depth",
        "x_label": X_AXES["total_bits"],
        "y_label": MAP_Y_AXES[y_field],
        "x_ticks": [{"at": _num(x_axis.scale(tick)), "label": _tick_label(tick)} for tick in x_axis.ticks],
        "y_ticks": [{"at": _num(y_axis.scale(slots[value])), "label": _tick_label(value)} for value in y_values],
        "markers": markers,
        "legend": legend,
        "legend_x": _num(WIDTH - MARGIN["right"] + 34),
    }


def render_best_map(
    rows: Sequence[Mapping[str, str]],
    y_field: str = "k",
    filters: Mapping[str, float] | None = None,
    template_dir: Path | None = None,
) -> str:
    context = build_best_map(rows, y_field, filters)
    return _environment(template_dir).get_template("best_map.svg.j2").render(**context)


__all__ = [
    "ALGORITHM_COLORS",
    "BIT_DEPTH_MARKERS",
    "CurveFilter",
    "build_best_map",
    "build_curves",
    "color_for",
    "marker_for",
    "marker_shape",
    "render_best_map",
    "render_curves",
]
