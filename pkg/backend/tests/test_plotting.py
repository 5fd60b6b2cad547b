from __future__ import annotations

import math
from dataclasses import replace

import pytest

from app.errors import ConfigError, RecordSchemaError
from app.services.plotting import (
    ALGORITHM_COLORS,
    BIT_DEPTH_MARKERS,
    CurveFilter,
    build_best_map,
    build_curves,
    marker_shape,
    render_best_map,
    render_curves,
)
from engine.catalog import CellSummary


def summary(algorithm="qiht", bit_depth=1, total_bits=500, mean=10.0, k=5, isnr_db=math.inf):
    return CellSummary(
        algorithm=algorithm,
        bit_depth=bit_depth,
        total_bits=total_bits,
        m=total_bits // bit_depth,
        n=100,
        k=k,
        isnr_db=isnr_db,
        corruption=0.0,
        trials=20,
        mean_rsnr_db=mean,
        stderr_rsnr_db=0.5,
        mean_iterations=30.0,
        mean_mismatch=4.0,
    )


TWO_SERIES = [
    summary(total_bits=500, mean=8.0),
    summary(total_bits=1000, mean=12.0),
    summary(algorithm="qsp", bit_depth=2, total_bits=500, mean=6.0),
    summary(algorithm="qsp", bit_depth=2, total_bits=1000, mean=math.inf),
]


def test_legend_convention() -> None:
    assert ALGORITHM_COLORS["qiht"] == "#d62728"
    assert ALGORITHM_COLORS["aop-qiht"] == "#ff00ff"
    assert ALGORITHM_COLORS["qcosamp"] == "#2ca02c"
    assert ALGORITHM_COLORS["qsp"] == "#1f77b4"
    assert [BIT_DEPTH_MARKERS[b] for b in (1, 2, 3, 4)] == ["circle", "square", "triangle", "star"]
    assert marker_shape("circle", 1.0, 2.0)["tag"] == "circle"
    assert marker_shape("square", 1.0, 2.0)["tag"] == "rect"
    assert len(marker_shape("star", 0.0, 0.0)["points"].split()) == 10


def test_two_series_give_two_polylines_and_a_legend() -> None:
    svg = render_curves(TWO_SERIES)

    assert svg.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert svg.count("<polyline") == 2
    assert 'stroke="#d62728"' in svg
    assert 'stroke="#1f77b4"' in svg
    assert "QIHT B=1" in svg
    assert "QSP B=2" in svg
    assert "(clipped)" in svg


def test_rendering_is_deterministic() -> None:
    assert render_curves(TWO_SERIES) == render_curves(list(reversed(TWO_SERIES)))


def test_values_clip_at_the_ceiling() -> None:
    context = build_curves(TWO_SERIES, ceiling_db=20.0)

    assert context["ceiling"] == "20.00"
    assert max(float(tick["label"]) for tick in context["y_ticks"]) == 20.0


def test_filtering_to_nothing_is_an_error() -> None:
    with pytest.raises(ConfigError, match="no rows after filtering"):
        build_curves(TWO_SERIES, selection=CurveFilter(algorithms=["qcosamp"]))


def test_varying_dimensions_split_series() -> None:
    rows = TWO_SERIES + [summary(total_bits=500, k=9, mean=3.0), summary(total_bits=1000, k=9, mean=4.0)]

    context = build_curves(rows)

    labels = [entry["label"] for entry in context["series"]]
    assert labels == ["QIHT B=1 (k=5)", "QIHT B=1 (k=9)", "QSP B=2 (k=5)"]
    assert len(build_curves(rows, selection=CurveFilter(k=9))["series"]) == 1


def test_corruption_curves_split_by_noise_level() -> None:
    rows = [
        replace(summary(algorithm=algorithm, total_bits=1000, isnr_db=isnr, mean=mean), corruption=fraction)
        for algorithm in ("qiht", "aop-qiht")
        for isnr in (math.inf, 10.0)
        for fraction, mean in ((0.0, 12.0), (0.04, 7.0), (0.08, 3.0))
    ]

    context = build_curves(rows, x_field="corruption")

    assert [entry["label"] for entry in context["series"]] == [
        "QIHT B=1 (isnr_db=10.0)",
        "QIHT B=1 (isnr_db=inf)",
        "AOP-QIHT B=1 (isnr_db=10.0)",
        "AOP-QIHT B=1 (isnr_db=inf)",
    ]
    assert all(len(entry["points"]) == 3 for entry in context["series"])


def test_unknown_x_axis_is_rejected() -> None:
    with pytest.raises(ConfigError):
        build_curves(TWO_SERIES, x_field="m")


def catalog_rows():
    return [
        {"total_bits": "500", "k": "2", "best_algorithm": "qiht", "best_bit_depth": "1", "best_mean_rsnr_db": "9.5"},
        {"total_bits": "1000", "k": "2", "best_algorithm": "qcosamp", "best_bit_depth": "3", "best_mean_rsnr_db": "14.0"},
        {"total_bits": "500", "k": "4", "best_algorithm": "qsp", "best_bit_depth": "4", "best_mean_rsnr_db": "5.0"},
    ]


def test_best_map_places_one_marker_per_cell() -> None:
    context = build_best_map(catalog_rows())

    assert len(context["markers"]) == 3
    assert [marker["color"] for marker in context["markers"]] == ["#d62728", "#1f77b4", "#2ca02c"]
    assert context["markers"][2]["shape"]["tag"] == "polygon"
    svg = render_best_map(catalog_rows())
    assert svg.count("<title>") == 3
    assert "QCoSaMP B=3: 14.0 dB" in svg


def test_best_map_rejects_ambiguous_cells() -> None:
    rows = catalog_rows() + [dict(catalog_rows()[0], best_algorithm="qsp")]

    with pytest.raises(ConfigError, match="narrow the selection"):
        build_best_map(rows)
    assert len(build_best_map(rows[:3], filters={"k": 2.0})["markers"]) == 2


def test_best_map_needs_its_columns() -> None:
    rows = [{key: value for key, value in row.items() if key != "k"} for row in catalog_rows()]

    with pytest.raises(RecordSchemaError):
        build_best_map(rows)
