from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from .errors import DimensionError
from .linalg import normalize
from .problem import Problem, add_noise, corrupt, derive_seed, gen_problem, rsnr
from .projection import DEFAULT_PROJECTION_MAX_ITER, DEFAULT_PROJECTION_TOL, ProjectionMode
from .quantizer import DEFAULT_SATURATION, Quantizer, quantizer_for_bits
from .reference import biht, cosamp, iht, subspace_pursuit
from .solvers import SolverConfig, SolverResult, aop_qiht, qcosamp, qiht, qsp, step_size

logger = logging.getLogger("qcsbench.executor")

# Catalog tie-breaks follow this order after bit depth.
ALGORITHMS = ("qiht", "aop-qiht", "qcosamp", "qsp", "iht", "biht", "cosamp", "sp")
# Sweeps study sparse corruption only; single runs accept any fraction.
MAX_SWEEP_CORRUPTION = 0.10


def algorithm_rank(algorithm: str) -> int:
    try:
        return ALGORITHMS.index(algorithm)
    except ValueError:
        return len(ALGORITHMS)


def format_isnr(value: float) -> str:
    return "inf" if math.isinf(value) else repr(float(value))


@dataclass(frozen=True)
class SweepCell:
    bit_depth: int
    total_bits: int
    n: int
    k: int
    isnr_db: float = math.inf
    corruption: float = 0.0

    @property
    def m(self) -> int:
        return self.total_bits // self.bit_depth

    @property
    def identifier(self) -> str:
        return (
            f"B={self.bit_depth}|TB={self.total_bits}|M={self.m}|N={self.n}|K={self.k}"
            f"|isnr={format_isnr(self.isnr_db)}|c={float(self.corruption)!r}"
        )

    def sort_key(self) -> tuple:
        return (self.total_bits, self.bit_depth, self.k, self.isnr_db, self.corruption, self.n)

    def validate(self) -> None:
        if self.bit_depth < 1:
            raise DimensionError(f"bit depth must be positive, got {self.bit_depth}")
        if self.m < 1:
            raise DimensionError(
                f"total bits {self.total_bits} leave no measurement at bit depth {self.bit_depth}"
            )
        if self.k < 1 or self.k > self.n:
            raise DimensionError(f"sparsity {self.k} exceeds dimension {self.n}")
        if not 0.0 <= self.corruption <= 1.0:
            raise ValueError(f"corruption fraction must lie in [0, 1], got {self.corruption}")
        if not self.isnr_db > 0:
            raise ValueError(f"ISNR must be positive or inf, got {self.isnr_db}")


@dataclass(frozen=True)
class SweepGrid:
    sparsity_levels: Sequence[int]
    total_bits: Sequence[int]
    bit_depths: Sequence[int]
    n: int
    algorithms: Sequence[str]
    isnr_levels: Sequence[float] = (math.inf,)
    corruption_fractions: Sequence[float] = (0.0,)
    trials: int = 20

    def __post_init__(self) -> None:
        for name in ("sparsity_levels", "total_bits", "bit_depths", "algorithms", "isnr_levels", "corruption_fractions"):
            if not list(getattr(self, name)):
                raise ValueError(f"{name} must not be empty")
        unknown = sorted(set(self.algorithms) - set(ALGORITHMS))
        if unknown:
            raise ValueError(f"unknown algorithms: {', '.join(unknown)}")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        for fraction in self.corruption_fractions:
            if not 0.0 <= fraction <= MAX_SWEEP_CORRUPTION:
                raise ValueError(
                    f"sweep corruption fractions must lie in [0, {MAX_SWEEP_CORRUPTION}], got {fraction}"
                )
        for cell in self.cells():
            cell.validate()

    def cells(self) -> List[SweepCell]:
        return [
            SweepCell(
                bit_depth=int(bits),
                total_bits=int(budget),
                n=self.n,
                k=int(k),
                isnr_db=float(isnr),
                corruption=float(fraction),
            )
            for k, budget, isnr, bits, fraction in itertools.product(
                self.sparsity_levels,
                self.total_bits,
                self.isnr_levels,
                self.bit_depths,
                self.corruption_fractions,
            )
        ]

    @property
    def size(self) -> int:
        return len(self.cells()) * len(self.algorithms) * self.trials


@dataclass(frozen=True)
class SolverOptions:
    """Solver and quantizer knobs shared by every trial of a run.

    ``max_iterations`` of None picks the per-algorithm default, and
    ``outlier_budget`` of None hands AOP-QIHT the true corruption count.
    """

    step_size: Optional[float] = None
    projection_mode: ProjectionMode = ProjectionMode.JOINT
    max_iterations: Optional[int] = None
    prune: bool = True
    consistency_stop: bool = False
    outlier_budget: Optional[int] = None
    consistent_final_fit: bool = False
    projection_max_iter: int = DEFAULT_PROJECTION_MAX_ITER
    projection_tol: float = DEFAULT_PROJECTION_TOL
    saturation: float = DEFAULT_SATURATION
    one_bit_sign: bool = True

    def solver_config(self, algorithm: str, sparsity: int, corrupted: int) -> SolverConfig:
        budget = corrupted if self.outlier_budget is None else self.outlier_budget
        return SolverConfig.for_algorithm(
            algorithm,
            sparsity,
            max_iterations=self.max_iterations,
            step_size=self.step_size,
            outlier_budget=budget if algorithm == "aop-qiht" else 0,
            projection_mode=self.projection_mode,
            consistency_stop=self.consistency_stop,
            prune=self.prune,
            consistent_final_fit=self.consistent_final_fit,
            projection_max_iter=self.projection_max_iter,
            projection_tol=self.projection_tol,
        )

    def quantizer(self, bit_depth: int) -> Quantizer:
        return quantizer_for_bits(bit_depth, self.saturation, self.one_bit_sign)


@dataclass(frozen=True)
class TrialRecord:
    algorithm: str
    bit_depth: int
    total_bits: int
    m: int
    n: int
    k: int
    isnr_db: float
    corruption: float
    trial: int
    seed: int
    rsnr_db: float
    iterations: int
    mismatch: int
    runtime_ms: Optional[float] = None

    @property
    def cell(self) -> SweepCell:
        return SweepCell(
            bit_depth=self.bit_depth,
            total_bits=self.total_bits,
            n=self.n,
            k=self.k,
            isnr_db=self.isnr_db,
            corruption=self.corruption,
        )

    def sort_key(self) -> tuple:
        return (*self.cell.sort_key(), algorithm_rank(self.algorithm), self.algorithm, self.trial)

    def deterministic(self) -> "TrialRecord":
        """Copy without the wall-clock column."""

        values = asdict(self)
        values["runtime_ms"] = None
        return TrialRecord(**values)


@dataclass
class Reconstruction:
    algorithm: str
    result: SolverResult
    runtime_ms: float
    error: Optional[str] = None


Handler = Callable[[np.ndarray, np.ndarray, Quantizer, SolverConfig], SolverResult]


class ReconstructionEngine:
    """Dispatch an algorithm name to its solver and contain its failures."""

    def solve(
        self, algorithm: str, phi: np.ndarray, y: np.ndarray, quantizer: Quantizer, cfg: SolverConfig
    ) -> Reconstruction:
        handler: Optional[Handler] = getattr(self, f"_handle_{algorithm.replace('-', '_')}", None)
        if handler is None:
            raise ValueError(f"unknown algorithm: {algorithm}")
        started = time.perf_counter()
        error: Optional[str] = None
        try:
            result = handler(phi, y, quantizer, cfg)
        except Exception as exc:
            error = str(exc)
            result = SolverResult(
                estimate=np.zeros(phi.shape[1]),
                iterations_run=0,
                mismatch_count=int(np.asarray(y).size),
                degenerate=True,
            )
        runtime_ms = (time.perf_counter() - started) * 1000.0
        return Reconstruction(algorithm=algorithm, result=result, runtime_ms=runtime_ms, error=error)

    def _handle_qiht(self, phi, y, quantizer, cfg) -> SolverResult:
        return qiht(phi, y, quantizer, cfg)

    def _handle_aop_qiht(self, phi, y, quantizer, cfg) -> SolverResult:
        return aop_qiht(phi, y, quantizer, cfg)

    def _handle_qcosamp(self, phi, y, quantizer, cfg) -> SolverResult:
        return qcosamp(phi, y, quantizer, cfg)

    def _handle_qsp(self, phi, y, quantizer, cfg) -> SolverResult:
        return qsp(phi, y, quantizer, cfg)

    # Classical solvers read y as real-valued measurements.
    def _handle_iht(self, phi, y, quantizer, cfg) -> SolverResult:
        estimate = iht(phi, y, cfg.sparsity, step_size(phi, cfg), cfg.max_iterations)
        return self._classical(phi, y, quantizer, estimate, cfg.max_iterations)

    def _handle_biht(self, phi, y, quantizer, cfg) -> SolverResult:
        estimate = biht(phi, y, cfg.sparsity, step_size(phi, cfg), cfg.max_iterations)
        return self._classical(phi, y, quantizer, estimate, cfg.max_iterations)

    def _handle_cosamp(self, phi, y, quantizer, cfg) -> SolverResult:
        estimate = cosamp(phi, y, cfg.sparsity, cfg.max_iterations)
        return self._classical(phi, y, quantizer, estimate, cfg.max_iterations)

    def _handle_sp(self, phi, y, quantizer, cfg) -> SolverResult:
        iterations = 0

        def count(iteration: int, _: np.ndarray) -> None:
            nonlocal iterations
            iterations = iteration

        estimate = subspace_pursuit(phi, y, cfg.sparsity, cfg.max_iterations, observer=count)
        return self._classical(phi, y, quantizer, estimate, iterations)

    @staticmethod
    def _classical(
        phi: np.ndarray, y: np.ndarray, quantizer: Quantizer, estimate: np.ndarray, iterations: int
    ) -> SolverResult:
        estimate = normalize(estimate)
        mismatch = int(np.count_nonzero(np.asarray(y) != quantizer.quantize(phi @ estimate)))
        return SolverResult(
            estimate=estimate,
            iterations_run=iterations,
            mismatch_count=mismatch,
            degenerate=not estimate.any(),
        )


def trial_seed(cell: SweepCell, trial_index: int, master_seed: int) -> int:
    # Algorithms are left out so every solver sees the same instance.
    return derive_seed(master_seed, cell.identifier, trial_index)


def build_problem(cell: SweepCell, seed: int, quantizer: Quantizer) -> Problem:
    problem = gen_problem(cell.n, cell.m, cell.k, seed)
    problem = add_noise(problem, cell.isnr_db, seed)
    problem = corrupt(problem, cell.corruption, seed)
    return problem.quantized(quantizer)


class TrialExecutor:
    """Runs trials and sweeps; records are a pure function of (master_seed, cell, trial)."""

    def __init__(
        self,
        options: SolverOptions | None = None,
        engine: ReconstructionEngine | None = None,
        max_workers: int | None = None,
        record_runtime: bool = True,
    ):
        self.options = options or SolverOptions()
        self.engine = engine or ReconstructionEngine()
        self.max_workers = max_workers
        self.record_runtime = record_runtime

    def run_trial(self, cell: SweepCell, trial_index: int, algorithm: str, master_seed: int) -> TrialRecord:
        return self._run_cell_trial(cell, trial_index, [algorithm], master_seed)[0]

    def run_sweep(
        self,
        grid: SweepGrid,
        master_seed: int,
        cells: Iterable[SweepCell] | None = None,
    ) -> List[TrialRecord]:
        selected = list(cells) if cells is not None else grid.cells()
        tasks = [(cell, trial) for cell in selected for trial in range(grid.trials)]
        logger.info(
            "Sweeping %d cells x %d algorithms x %d trials",
            len(selected),
            len(grid.algorithms),
            grid.trials,
        )
        records: List[TrialRecord] = []
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            batches = pool.map(
                lambda task: self._run_cell_trial(task[0], task[1], grid.algorithms, master_seed),
                tasks,
            )
            for done, batch in enumerate(batches, start=1):
                records.extend(batch)
                if done % grid.trials == 0:
                    logger.info("Completed cell %d/%d", done // grid.trials, len(selected))
        return sorted(records, key=TrialRecord.sort_key)

    def _run_cell_trial(
        self, cell: SweepCell, trial_index: int, algorithms: Sequence[str], master_seed: int
    ) -> List[TrialRecord]:
        cell.validate()
        seed = trial_seed(cell, trial_index, master_seed)
        quantizer = self.options.quantizer(cell.bit_depth)
        problem = build_problem(cell, seed, quantizer)
        corrupted = int(problem.corrupted_indices.size)
        records = []
        for algorithm in algorithms:
            cfg = self.options.solver_config(algorithm, cell.k, corrupted)
            outcome = self.engine.solve(algorithm, problem.phi, problem.y, quantizer, cfg)
            if outcome.error:
                logger.warning(
                    "%s failed on %s trial %d: %s", algorithm, cell.identifier, trial_index, outcome.error
                )
            elif outcome.result.degenerate:
                logger.debug("%s returned the zero estimate on %s trial %d", algorithm, cell.identifier, trial_index)
            records.append(
                TrialRecord(
                    algorithm=algorithm,
                    bit_depth=cell.bit_depth,
                    total_bits=cell.total_bits,
                    m=cell.m,
                    n=cell.n,
                    k=cell.k,
                    isnr_db=cell.isnr_db,
                    corruption=cell.corruption,
                    trial=trial_index,
                    seed=seed,
                    rsnr_db=rsnr(outcome.result.estimate, problem.x_true),
                    iterations=outcome.result.iterations_run,
                    mismatch=outcome.result.mismatch_count,
                    runtime_ms=outcome.runtime_ms if self.record_runtime else None,
                )
            )
        return records


def run_trial(
    cell: SweepCell,
    trial_index: int,
    algorithm: str,
    master_seed: int,
    options: SolverOptions | None = None,
) -> TrialRecord:
    return TrialExecutor(options).run_trial(cell, trial_index, algorithm, master_seed)


def run_sweep(
    grid: SweepGrid,
    master_seed: int,
    options: SolverOptions | None = None,
    max_workers: int | None = None,
    record_runtime: bool = True,
) -> List[TrialRecord]:
    executor = TrialExecutor(options, max_workers=max_workers, record_runtime=record_runtime)
    return executor.run_sweep(grid, master_seed)


__all__ = [
    "ALGORITHMS",
    "MAX_SWEEP_CORRUPTION",
    "ReconstructionEngine",
    "Reconstruction",
    "SolverOptions",
    "SweepCell",
    "SweepGrid",
    "TrialExecutor",
    "TrialRecord",
    "algorithm_rank",
    "build_problem",
    "format_isnr",
    "run_sweep",
    "run_trial",
    "trial_seed",
]
