from __future__ import annotations

import numpy as np

from .errors import DimensionError

POWER_ITERATION_LIMIT = 10_000
POWER_ITERATION_SEED = 0x5EED


def _as_vector(x: np.ndarray) -> np.ndarray:
    vector = np.asarray(x, dtype=np.float64)
    if vector.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {vector.shape}")
    return vector


def as_matrix(phi: np.ndarray) -> np.ndarray:
    matrix = np.asarray(phi, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionError(f"expected a non-empty matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DimensionError("matrix entries must be finite")
    return matrix


def top_support(x: np.ndarray, k: int) -> np.ndarray:
    """Sorted indices of the k largest-magnitude entries; ties go to the lowest index."""

    vector = _as_vector(x)
    if k <= 0 or k > vector.size:
        raise DimensionError(f"support size {k} outside 1..{vector.size}")
    order = np.argsort(-np.abs(vector), kind="stable")
    return np.sort(order[:k])


def hard_threshold(x: np.ndarray, k: int) -> np.ndarray:
    vector = _as_vector(x)
    support = top_support(vector, k)
    out = np.zeros_like(vector)
    out[support] = vector[support]
    return out


def support_of(x: np.ndarray) -> np.ndarray:
    return np.flatnonzero(_as_vector(x))


def merge_supports(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.union1d(first, second).astype(np.intp)


def restrict_columns(phi: np.ndarray, support: np.ndarray) -> np.ndarray:
    matrix = np.asarray(phi, dtype=np.float64)
    columns = np.asarray(support, dtype=np.intp)
    if columns.size and (columns.min() < 0 or columns.max() >= matrix.shape[1]):
        raise DimensionError(f"column index out of range for {matrix.shape[1]} columns")
    return matrix[:, columns]


def least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of a @ x = b."""

    matrix = np.asarray(a, dtype=np.float64)
    rhs = _as_vector(b)
    if matrix.ndim != 2 or matrix.shape[0] != rhs.size:
        raise DimensionError(f"cannot solve {matrix.shape} system against {rhs.size} values")
    if matrix.shape[1] == 0:
        return np.zeros(0, dtype=np.float64)
    solution, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    return solution


def normalize(x: np.ndarray) -> np.ndarray:
    vector = _as_vector(x)
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        return np.zeros_like(vector)
    return vector / norm


def operator_norm(phi: np.ndarray, tolerance: float = 1e-10) -> float:
    """Largest singular value by power iteration on phi.T @ phi."""

    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    matrix = as_matrix(phi)
    rng = np.random.Generator(np.random.Philox(POWER_ITERATION_SEED))
    vector = normalize(rng.standard_normal(matrix.shape[1]))
    estimate = 0.0
    for _ in range(POWER_ITERATION_LIMIT):
        image = matrix.T @ (matrix @ vector)
        norm = np.linalg.norm(image)
        if norm == 0.0:
            return 0.0
        vector = image / norm
        previous, estimate = estimate, float(np.linalg.norm(matrix @ vector))
        if abs(estimate - previous) <= tolerance * estimate:
            break
    return estimate


__all__ = [
    "as_matrix",
    "hard_threshold",
    "least_squares",
    "merge_supports",
    "normalize",
    "operator_norm",
    "restrict_columns",
    "support_of",
    "top_support",
]
