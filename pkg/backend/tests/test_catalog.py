"""Tests for per-cell summaries and the best-algorithm catalog."""

from __future__ import annotations

import math

import pytest

from engine.catalog import (
    best_catalog,
    mean_rsnr,
    resolve_group_fields,
    stderr_rsnr,
    summarize,
)


def test_mean_and_stderr() -> None:
    assert mean_rsnr([10.0, 20.0]) == 15.0
    assert mean_rsnr([10.0, math.inf]) == math.inf
    assert stderr_rsnr([3.0]) == 0.0
    assert stderr_rsnr([10.0, 20.0]) == pytest.approx(5.0)
    assert math.isnan(stderr_rsnr([10.0, math.inf]))


def test_summarize_groups_trials_of_a_cell(make_record) -> None:
    records = [
        make_record(rsnr_db=10.0, trial=0),
        make_record(rsnr_db=14.0, trial=1),
        make_record(algorithm="qsp", rsnr_db=7.0, trial=0),
    ]

    summaries = summarize(records)

    assert [(s.algorithm, s.trials) for s in summaries] == [("qiht", 2), ("qsp", 1)]
    assert summaries[0].mean_rsnr_db == 12.0
    assert summaries[0].mean_iterations == 10.5
    assert summaries[0].mean_mismatch == 0.5


def test_single_record_wins_its_group(make_record) -> None:
    rows = best_catalog([make_record(algorithm="qsp", bit_depth=3, total_bits=600)], ["total_bits"])

    assert len(rows) == 1
    assert rows[0].best_algorithm == "qsp"
    assert rows[0].best_bit_depth == 3
    assert rows[0].candidates == 1
    assert rows[0].value("total_bits") == 600


def test_highest_mean_wins(make_record) -> None:
    records = [
        make_record(algorithm="qcosamp", rsnr_db=12.0),
        make_record(algorithm="qiht", rsnr_db=9.0),
    ]

    (row,) = best_catalog(records, ["total_bits"])

    assert row.best_algorithm == "qcosamp"
    assert row.best_mean_rsnr_db == 12.0
    assert row.candidates == 2


def test_ties_prefer_lower_bit_depth_then_algorithm_order(make_record) -> None:
    records = [
        make_record(algorithm="qiht", bit_depth=2, rsnr_db=8.0),
        make_record(algorithm="qsp", bit_depth=1, rsnr_db=8.0),
        make_record(algorithm="aop-qiht", bit_depth=1, rsnr_db=8.0),
    ]

    (row,) = best_catalog(records, ["total_bits"])

    assert (row.best_algorithm, row.best_bit_depth) == ("aop-qiht", 1)


def test_exact_recovery_beats_any_finite_mean(make_record) -> None:
    records = [
        make_record(algorithm="qsp", bit_depth=4, rsnr_db=math.inf),
        make_record(algorithm="qiht", bit_depth=1, rsnr_db=80.0),
    ]

    (row,) = best_catalog(records, ["total_bits"])

    assert row.best_algorithm == "qsp"


def test_one_row_per_group_in_sorted_order(make_record) -> None:
    records = [
        make_record(total_bits=1000, k=2, isnr_db=20.0),
        make_record(total_bits=500, k=2, isnr_db=20.0),
        make_record(total_bits=500, k=4, isnr_db=math.inf),
        make_record(total_bits=500, k=4, isnr_db=math.inf, trial=1),
    ]

    rows = best_catalog(records, ["tb", "isnr", "sparsity"])

    assert [row.group for row in rows] == [
        (("total_bits", 500), ("isnr_db", 20.0), ("k", 2)),
        (("total_bits", 500), ("isnr_db", math.inf), ("k", 4)),
        (("total_bits", 1000), ("isnr_db", 20.0), ("k", 2)),
    ]


def test_group_fields_are_validated() -> None:
    assert resolve_group_fields(["K", " bits ", "k", ""]) == ["k", "bit_depth"]
    with pytest.raises(ValueError, match="cannot group by"):
        resolve_group_fields(["algorithm"])


def test_empty_records_are_rejected() -> None:
    with pytest.raises(ValueError):
        best_catalog([], ["total_bits"])
