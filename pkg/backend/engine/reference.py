"""Classical unquantized solvers kept as oracles for the quantized variants."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DimensionError
from .linalg import hard_threshold, least_squares, merge_supports, support_of, top_support
from .solvers import Observer


def iht(
    phi: np.ndarray,
    y: np.ndarray,
    sparsity: int,
    mu: float,
    max_iterations: int,
    x0: Optional[np.ndarray] = None,
    observer: Observer | None = None,
) -> np.ndarray:
    x = np.zeros(phi.shape[1]) if x0 is None else np.array(x0, dtype=np.float64)
    for iteration in range(1, max_iterations + 1):
        x = hard_threshold(x + mu * (phi.T @ (y - phi @ x)), sparsity)
        if observer:
            observer(iteration, x)
    return x


def biht(
    phi: np.ndarray,
    y: np.ndarray,
    sparsity: int,
    mu: float,
    max_iterations: int,
    x0: Optional[np.ndarray] = None,
    observer: Observer | None = None,
) -> np.ndarray:
    x = np.zeros(phi.shape[1]) if x0 is None else np.array(x0, dtype=np.float64)
    for iteration in range(1, max_iterations + 1):
        signs = np.where(phi @ x >= 0.0, 1.0, -1.0)
        x = hard_threshold(x + mu * (phi.T @ (y - signs)), sparsity)
        if observer:
            observer(iteration, x)
    return x


def cosamp(
    phi: np.ndarray,
    y: np.ndarray,
    sparsity: int,
    max_iterations: int,
    observer: Observer | None = None,
) -> np.ndarray:
    if 2 * sparsity > phi.shape[1]:
        raise DimensionError(f"2K = {2 * sparsity} exceeds dimension {phi.shape[1]}")
    a = np.zeros(phi.shape[1])
    v = y.copy()
    for iteration in range(1, max_iterations + 1):
        merged = merge_supports(top_support(phi.T @ v, 2 * sparsity), support_of(a))
        b = np.zeros(phi.shape[1])
        b[merged] = least_squares(phi[:, merged], y)
        a = hard_threshold(b, sparsity)
        if observer:
            observer(iteration, a)
        v = y - phi @ a
    return a


def subspace_pursuit(
    phi: np.ndarray,
    y: np.ndarray,
    sparsity: int,
    max_iterations: int,
    observer: Observer | None = None,
) -> np.ndarray:
    def residual_of(support: np.ndarray) -> np.ndarray:
        columns = phi[:, support]
        return y - columns @ least_squares(columns, y)

    support = top_support(phi.T @ y, sparsity)
    residual = residual_of(support)
    for iteration in range(1, max_iterations + 1):
        candidates = merge_supports(support, top_support(phi.T @ residual, sparsity))
        coefficients = least_squares(phi[:, candidates], y)
        next_support = candidates[top_support(coefficients, sparsity)]
        next_residual = residual_of(next_support)
        if np.linalg.norm(next_residual) > np.linalg.norm(residual):
            break
        unchanged = np.array_equal(next_support, support)
        support, residual = next_support, next_residual
        if observer:
            x = np.zeros(phi.shape[1])
            x[support] = least_squares(phi[:, support], y)
            observer(iteration, x)
        if unchanged:
            break
    x = np.zeros(phi.shape[1])
    x[support] = least_squares(phi[:, support], y)
    return x


__all__ = ["biht", "cosamp", "iht", "subspace_pursuit"]
