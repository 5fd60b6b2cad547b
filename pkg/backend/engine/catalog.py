from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .executor import TrialRecord, algorithm_rank

logger = logging.getLogger("qcsbench.catalog")

GROUP_FIELDS = ("total_bits", "isnr_db", "k", "n", "m", "corruption", "bit_depth")
GROUP_ALIASES = {"isnr": "isnr_db", "sparsity": "k", "K": "k", "tb": "total_bits", "bits": "bit_depth"}
SUMMARY_KEY = ("algorithm", "bit_depth", "total_bits", "m", "n", "k", "isnr_db", "corruption")


@dataclass(frozen=True)
class CellSummary:
    algorithm: str
    bit_depth: int
    total_bits: int
    m: int
    n: int
    k: int
    isnr_db: float
    corruption: float
    trials: int
    mean_rsnr_db: float
    stderr_rsnr_db: float
    mean_iterations: float
    mean_mismatch: float


@dataclass(frozen=True)
class CatalogRow:
    group: Tuple[Tuple[str, object], ...]
    best_algorithm: str
    best_bit_depth: int
    best_mean_rsnr_db: float
    candidates: int

    def value(self, name: str) -> object:
        return dict(self.group)[name]


def resolve_group_fields(fields: Iterable[str]) -> List[str]:
    resolved = []
    for name in fields:
        name = name.strip()
        if not name:
            continue
        canonical = GROUP_ALIASES.get(name, name)
        if canonical not in GROUP_FIELDS:
            raise ValueError(f"cannot group by {name!r}; choose from {', '.join(GROUP_FIELDS)}")
        if canonical not in resolved:
            resolved.append(canonical)
    return resolved


def mean_rsnr(values: Sequence[float]) -> float:
    """Arithmetic mean in dB; a single exact recovery (+inf) makes the mean +inf."""

    return float(np.mean(np.asarray(values, dtype=np.float64)))


def stderr_rsnr(values: Sequence[float]) -> float:
    array = np.asarray(values, dtype=np.float64)
    if array.size < 2:
        return 0.0
    if not np.all(np.isfinite(array)):
        return math.nan
    return float(np.std(array, ddof=1) / math.sqrt(array.size))


def summarize(records: Iterable[TrialRecord]) -> List[CellSummary]:
    groups: Dict[tuple, List[TrialRecord]] = defaultdict(list)
    for record in records:
        groups[tuple(getattr(record, name) for name in SUMMARY_KEY)].append(record)
    summaries = []
    for key, members in groups.items():
        values = dict(zip(SUMMARY_KEY, key))
        rsnrs = [record.rsnr_db for record in members]
        summaries.append(
            CellSummary(
                **values,
                trials=len(members),
                mean_rsnr_db=mean_rsnr(rsnrs),
                stderr_rsnr_db=stderr_rsnr(rsnrs),
                mean_iterations=float(np.mean([record.iterations for record in members])),
                mean_mismatch=float(np.mean([record.mismatch for record in members])),
            )
        )
    return sorted(summaries, key=_summary_key)


def _summary_key(summary: CellSummary) -> tuple:
    return (
        summary.total_bits,
        summary.bit_depth,
        summary.k,
        summary.isnr_db,
        summary.corruption,
        summary.n,
        algorithm_rank(summary.algorithm),
        summary.algorithm,
    )


def best_catalog(records: Iterable[TrialRecord], group_by: Sequence[str]) -> List[CatalogRow]:
    """Best (algorithm, bit depth) pair by mean RSNR within each group.

    Ties go to the lower bit depth, then to the earlier algorithm in
    qiht, aop-qiht, qcosamp, qsp order.
    """

    fields = resolve_group_fields(group_by)
    records = list(records)
    if not records:
        raise ValueError("no records to catalog")
    groups: Dict[tuple, Dict[Tuple[str, int], List[float]]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        group = tuple(getattr(record, name) for name in fields)
        groups[group][(record.algorithm, record.bit_depth)].append(record.rsnr_db)

    rows = []
    for group in sorted(groups):
        candidates = groups[group]
        if not candidates:
            continue
        means = {pair: mean_rsnr(values) for pair, values in candidates.items()}
        (algorithm, bit_depth), best = min(
            means.items(),
            key=lambda item: (-item[1], item[0][1], algorithm_rank(item[0][0]), item[0][0]),
        )
        rows.append(
            CatalogRow(
                group=tuple(zip(fields, group)),
                best_algorithm=algorithm,
                best_bit_depth=bit_depth,
                best_mean_rsnr_db=best,
                candidates=len(candidates),
            )
        )
    logger.debug("Catalogued %d groups over %s", len(rows), ",".join(fields) or "<all>")
    return rows


__all__ = [
    "CatalogRow",
    "CellSummary",
    "GROUP_FIELDS",
    "best_catalog",
    "mean_rsnr",
    "resolve_group_fields",
    "stderr_rsnr",
    "summarize",
]
