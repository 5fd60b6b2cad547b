"""Consistency projections onto the quantization box R_y.

``project_consistent`` fits coefficients x and a point y' in the closed box
R_y so that ||y' - Phi_T x|| is small. Two readings are supported:

* ``literal``: project y onto R_y (a no-op for level-valued y) and solve least
  squares, which reproduces the unquantized residual and coefficients.
* ``joint``: alternate exact block minimizations, least squares in x and a box
  projection in y', starting from y' = y. The objective never increases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionError
from .linalg import least_squares
from .quantizer import Quantizer

DEFAULT_PROJECTION_MAX_ITER = 50
DEFAULT_PROJECTION_TOL = 1e-6


class ProjectionMode(str, Enum):
    LITERAL = "literal"
    JOINT = "joint"


@dataclass(frozen=True)
class ProjectionResult:
    coefficients: np.ndarray
    consistent_point: np.ndarray
    residual: np.ndarray
    iterations: int
    objective_trace: list[float] = field(default_factory=list)


def project_consistent(
    phi_t: np.ndarray,
    y: np.ndarray,
    quantizer: Quantizer,
    mode: ProjectionMode = ProjectionMode.JOINT,
    max_iter: int = DEFAULT_PROJECTION_MAX_ITER,
    tol: float = DEFAULT_PROJECTION_TOL,
) -> ProjectionResult:
    matrix = np.asarray(phi_t, dtype=np.float64)
    measured = np.asarray(y, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != measured.size:
        raise DimensionError(f"Phi_T has shape {matrix.shape} but y has {measured.size} entries")
    mode = ProjectionMode(mode)

    point = quantizer.clip_to_regions(measured, measured)
    coefficients = least_squares(matrix, point)
    trace = [float(np.linalg.norm(point - matrix @ coefficients))]
    iterations = 1
    if mode is ProjectionMode.JOINT:
        threshold = tol * np.linalg.norm(measured)
        while iterations < max_iter:
            candidate = quantizer.clip_to_regions(matrix @ coefficients, measured)
            if np.linalg.norm(candidate - point) <= threshold:
                break
            point = candidate
            coefficients = least_squares(matrix, point)
            trace.append(float(np.linalg.norm(point - matrix @ coefficients)))
            iterations += 1
    return ProjectionResult(
        coefficients=coefficients,
        consistent_point=point,
        residual=point - matrix @ coefficients,
        iterations=iterations,
        objective_trace=trace,
    )


def resid(
    y: np.ndarray,
    phi_t: np.ndarray,
    quantizer: Quantizer,
    mode: ProjectionMode = ProjectionMode.JOINT,
    max_iter: int = DEFAULT_PROJECTION_MAX_ITER,
    tol: float = DEFAULT_PROJECTION_TOL,
) -> np.ndarray:
    return project_consistent(phi_t, y, quantizer, mode, max_iter, tol).residual


def pcoeff(
    y: np.ndarray,
    phi_t: np.ndarray,
    quantizer: Quantizer,
    mode: ProjectionMode = ProjectionMode.JOINT,
    max_iter: int = DEFAULT_PROJECTION_MAX_ITER,
    tol: float = DEFAULT_PROJECTION_TOL,
) -> np.ndarray:
    return project_consistent(phi_t, y, quantizer, mode, max_iter, tol).coefficients


__all__ = [
    "DEFAULT_PROJECTION_MAX_ITER",
    "DEFAULT_PROJECTION_TOL",
    "ProjectionMode",
    "ProjectionResult",
    "pcoeff",
    "project_consistent",
    "resid",
]
