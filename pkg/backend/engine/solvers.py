"""Greedy reconstruction from quantized measurements y = f_Q(Phi x).

All solvers share the signature ``solver(phi, y, quantizer, cfg, observer=None)``
and return a :class:`SolverResult` whose estimate lies on the unit sphere, or
is the zero vector with ``degenerate`` set when no direction can be formed.
``observer`` is called with ``(iteration, iterate)`` after every update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError
from .linalg import (
    as_matrix,
    hard_threshold,
    least_squares,
    merge_supports,
    normalize,
    operator_norm,
    support_of,
    top_support,
)
from .projection import (
    DEFAULT_PROJECTION_MAX_ITER,
    DEFAULT_PROJECTION_TOL,
    ProjectionMode,
    project_consistent,
)
from .quantizer import Quantizer

logger = logging.getLogger("qcsbench.engine")

Observer = Callable[[int, np.ndarray], None]

DEFAULT_MAX_ITERATIONS = {
    "qiht": 300,
    "aop-qiht": 300,
    "iht": 300,
    "biht": 300,
    "qcosamp": 50,
    "qsp": 50,
    "cosamp": 50,
    "sp": 50,
}


@dataclass(frozen=True)
class SolverConfig:
    sparsity: int
    max_iterations: int = 300
    step_size: Optional[float] = None  # None means 1 / ||Phi||_2^2
    outlier_budget: int = 0
    projection_mode: ProjectionMode = ProjectionMode.JOINT
    consistency_stop: bool = False
    prune: bool = True
    consistent_final_fit: bool = False  # QSP only; default is least squares on y
    projection_max_iter: int = DEFAULT_PROJECTION_MAX_ITER
    projection_tol: float = DEFAULT_PROJECTION_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "projection_mode", ProjectionMode(self.projection_mode))
        if self.sparsity < 1:
            raise ValueError(f"sparsity must be positive, got {self.sparsity}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"step size must be positive, got {self.step_size}")
        if self.outlier_budget < 0:
            raise ValueError(f"outlier budget must be nonnegative, got {self.outlier_budget}")
        if self.projection_max_iter < 1 or not self.projection_tol > 0:
            raise ValueError("projection needs max_iter >= 1 and tol > 0")

    @classmethod
    def for_algorithm(cls, algorithm: str, sparsity: int, **overrides: object) -> "SolverConfig":
        if overrides.get("max_iterations") is None:
            overrides["max_iterations"] = DEFAULT_MAX_ITERATIONS.get(algorithm, 300)
        return cls(sparsity=sparsity, **overrides)  # type: ignore[arg-type]


@dataclass
class SolverResult:
    estimate: np.ndarray
    iterations_run: int
    mismatch_count: int
    outlier_mask: Optional[np.ndarray] = None
    objective_trace: list[float] = field(default_factory=list)
    degenerate: bool = False

    @property
    def support(self) -> np.ndarray:
        return support_of(self.estimate)


def consistency_objective(quantizer: Quantizer, z: np.ndarray, y: np.ndarray) -> float:
    """Sum over thresholds of w_j |[(z_k - tau_j) s_kj]_-| with s_kj = sign side of y_k.

    The negative subgradient in z is exactly y - f_Q(z); for the sign quantizer
    the value is 2 ||[y * z]_-||_1.
    """

    thresholds = quantizer.interior_thresholds
    if thresholds.size == 0:
        return 0.0
    z = np.asarray(z, dtype=np.float64)[:, None]
    side = np.where(np.asarray(y, dtype=np.float64)[:, None] >= thresholds, 1.0, -1.0)
    violation = np.maximum(0.0, -(z - thresholds) * side)
    return float(np.sum(violation @ quantizer.level_weights()))


def phi_penalties(quantizer: Quantizer, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorised phi: sum_j |[(z_k - tau_j)(y_k - tau_j)]_-| for every k."""

    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if z.shape != y.shape:
        raise DimensionError(f"length mismatch: {z.shape} vs {y.shape}")
    thresholds = quantizer.interior_thresholds
    if thresholds.size == 0:
        return np.zeros_like(z)
    products = (z[:, None] - thresholds) * (y[:, None] - thresholds)
    return np.sum(np.abs(np.minimum(products, 0.0)), axis=1)


def phi_penalty(quantizer: Quantizer, x: float, y: float) -> float:
    return float(phi_penalties(quantizer, np.array([x]), np.array([y]))[0])


def select_outliers(penalties: np.ndarray, budget: int) -> np.ndarray:
    """Binary mask with zeros at the ``budget`` largest penalties (ties: lowest index)."""

    values = np.asarray(penalties, dtype=np.float64)
    if budget < 0 or budget > values.size:
        raise DimensionError(f"outlier budget {budget} outside 0..{values.size}")
    mask = np.ones(values.size, dtype=np.int8)
    if budget:
        mask[np.argsort(-values, kind="stable")[:budget]] = 0
    return mask


def step_size(phi: np.ndarray, cfg: SolverConfig) -> float:
    if cfg.step_size is not None:
        return float(cfg.step_size)
    norm = operator_norm(phi)
    if norm == 0.0:
        raise DimensionError("measurement matrix is zero")
    return 1.0 / norm**2


def _prepare(
    phi: np.ndarray, y: np.ndarray, quantizer: Quantizer, cfg: SolverConfig
) -> tuple[np.ndarray, np.ndarray]:
    matrix = as_matrix(phi)
    measured = np.asarray(y, dtype=np.float64)
    if measured.ndim != 1 or measured.size != matrix.shape[0]:
        raise DimensionError(f"Phi has {matrix.shape[0]} rows but y has shape {measured.shape}")
    if cfg.sparsity > matrix.shape[1]:
        raise DimensionError(f"sparsity {cfg.sparsity} exceeds dimension {matrix.shape[1]}")
    quantizer.validate_levels(measured)
    return matrix, measured


def _degenerate(matrix: np.ndarray, measured: np.ndarray, name: str) -> SolverResult:
    logger.debug("%s: Phi^T y vanishes, returning the zero estimate", name)
    return SolverResult(
        estimate=np.zeros(matrix.shape[1]),
        iterations_run=0,
        mismatch_count=int(measured.size),
        degenerate=True,
    )


def _finish(
    matrix: np.ndarray,
    measured: np.ndarray,
    quantizer: Quantizer,
    iterate: np.ndarray,
    iterations: int,
    trace: list[float],
    outlier_mask: Optional[np.ndarray] = None,
) -> SolverResult:
    estimate = normalize(iterate)
    mismatch = int(np.count_nonzero(measured != quantizer.quantize(matrix @ estimate)))
    return SolverResult(
        estimate=estimate,
        iterations_run=iterations,
        mismatch_count=mismatch,
        outlier_mask=outlier_mask,
        objective_trace=trace,
        degenerate=not estimate.any(),
    )


def qiht(
    phi: np.ndarray,
    y: np.ndarray,
    quantizer: Quantizer,
    cfg: SolverConfig,
    observer: Observer | None = None,
) -> SolverResult:
    """Quantized iterative hard thresholding."""

    matrix, measured = _prepare(phi, y, quantizer, cfg)
    x = normalize(matrix.T @ measured)
    if not x.any():
        return _degenerate(matrix, measured, "qiht")
    mu = step_size(matrix, cfg)
    trace: list[float] = []
    iterations = 0
    while iterations < cfg.max_iterations:
        x = hard_threshold(x + mu * (matrix.T @ (measured - quantizer.quantize(matrix @ x))), cfg.sparsity)
        iterations += 1
        if observer:
            observer(iterations, x)
        z = matrix @ x
        trace.append(consistency_objective(quantizer, z, measured))
        if cfg.consistency_stop and np.array_equal(quantizer.quantize(z), measured):
            break
    return _finish(matrix, measured, quantizer, x, iterations, trace)


def aop_qiht(
    phi: np.ndarray,
    y: np.ndarray,
    quantizer: Quantizer,
    cfg: SolverConfig,
    observer: Observer | None = None,
) -> SolverResult:
    """QIHT alternating with adaptive outlier masking of the L worst measurements."""

    matrix, measured = _prepare(phi, y, quantizer, cfg)
    budget = cfg.outlier_budget
    if budget > measured.size:
        raise DimensionError(f"outlier budget {budget} exceeds {measured.size} measurements")
    x = normalize(matrix.T @ measured)
    if not x.any():
        return _degenerate(matrix, measured, "aop-qiht")
    mu = step_size(matrix, cfg)
    mask = np.ones(measured.size, dtype=bool)
    mismatches = np.inf
    best = np.inf
    trace: list[float] = []
    iterations = 0
    while iterations < cfg.max_iterations and budget <= mismatches:
        if mask.all():
            rows, values = matrix, measured
        else:
            rows, values = matrix[mask], measured[mask]
        x = hard_threshold(x + mu * (rows.T @ (values - quantizer.quantize(rows @ x))), cfg.sparsity)
        iterations += 1
        if observer:
            observer(iterations, x)
        z = matrix @ x
        mismatches = int(np.count_nonzero(measured != quantizer.quantize(z)))
        penalties = phi_penalties(quantizer, z, measured)
        if mismatches <= best:
            mask = select_outliers(penalties, budget).astype(bool)
            best = mismatches
        trace.append(float(np.sum(penalties[mask])))
        if cfg.consistency_stop and mismatches == 0:
            break
    return _finish(
        matrix, measured, quantizer, x, iterations, trace, outlier_mask=mask.astype(np.int8)
    )


def qcosamp(
    phi: np.ndarray,
    y: np.ndarray,
    quantizer: Quantizer,
    cfg: SolverConfig,
    observer: Observer | None = None,
) -> SolverResult:
    """Quantized CoSaMP: region-consistent projection and a quantized residual."""

    matrix, measured = _prepare(phi, y, quantizer, cfg)
    if 2 * cfg.sparsity > matrix.shape[1]:
        raise DimensionError(f"2K = {2 * cfg.sparsity} exceeds dimension {matrix.shape[1]}")
    if not (matrix.T @ measured).any():
        return _degenerate(matrix, measured, "qcosamp")
    a = np.zeros(matrix.shape[1])
    v = measured.copy()
    trace: list[float] = []
    iterations = 0
    while iterations < cfg.max_iterations:
        omega = top_support(matrix.T @ v, 2 * cfg.sparsity)
        merged = merge_supports(omega, support_of(a))
        projection = project_consistent(
            matrix[:, merged],
            measured,
            quantizer,
            cfg.projection_mode,
            cfg.projection_max_iter,
            cfg.projection_tol,
        )
        b = np.zeros(matrix.shape[1])
        b[merged] = projection.coefficients
        a = hard_threshold(b, cfg.sparsity) if cfg.prune else b
        iterations += 1
        if observer:
            observer(iterations, a)
        z = matrix @ a
        v = measured - quantizer.quantize(z)
        trace.append(consistency_objective(quantizer, z, measured))
        if cfg.consistency_stop and not v.any():
            break
    return _finish(matrix, measured, quantizer, a, iterations, trace)


def qsp(
    phi: np.ndarray,
    y: np.ndarray,
    quantizer: Quantizer,
    cfg: SolverConfig,
    observer: Observer | None = None,
) -> SolverResult:
    """Quantized subspace pursuit; stops once the consistent residual grows."""

    matrix, measured = _prepare(phi, y, quantizer, cfg)
    proxy = matrix.T @ measured
    if not proxy.any():
        return _degenerate(matrix, measured, "qsp")

    def project(support: np.ndarray):
        return project_consistent(
            matrix[:, support],
            measured,
            quantizer,
            cfg.projection_mode,
            cfg.projection_max_iter,
            cfg.projection_tol,
        )

    def fit(support: np.ndarray) -> np.ndarray:
        if cfg.consistent_final_fit:
            coefficients = project(support).coefficients
        else:
            coefficients = least_squares(matrix[:, support], measured)
        return _embed(matrix.shape[1], support, coefficients)

    support = top_support(proxy, cfg.sparsity)
    residual = project(support).residual
    trace = [float(np.linalg.norm(residual))]
    iterations = 0
    while iterations < cfg.max_iterations:
        iterations += 1
        candidates = merge_supports(support, top_support(matrix.T @ residual, cfg.sparsity))
        coefficients = project(candidates).coefficients
        next_support = candidates[top_support(coefficients, cfg.sparsity)]
        next_residual = project(next_support).residual
        if np.linalg.norm(next_residual) > np.linalg.norm(residual):
            break
        trace.append(float(np.linalg.norm(next_residual)))
        unchanged = np.array_equal(next_support, support)
        support, residual = next_support, next_residual
        if observer:
            observer(iterations, fit(support))
        if unchanged:
            break
    return _finish(matrix, measured, quantizer, fit(support), iterations, trace)


def _embed(size: int, support: np.ndarray, values: np.ndarray) -> np.ndarray:
    x = np.zeros(size)
    x[support] = values
    return x


__all__ = [
    "DEFAULT_MAX_ITERATIONS",
    "Observer",
    "SolverConfig",
    "SolverResult",
    "aop_qiht",
    "consistency_objective",
    "phi_penalties",
    "phi_penalty",
    "qcosamp",
    "qiht",
    "qsp",
    "select_outliers",
    "step_size",
]
