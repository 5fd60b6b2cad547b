"""Synthetic problems: Gaussian Phi, unit-norm K-sparse signals, noise and corruption.

Every random draw comes from a Philox counter-based generator keyed by a
SHA-256 derived seed, and normals are produced by the Box-Muller transform on
those uniforms, so a record is a pure function of its seed.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DimensionError
from .quantizer import Quantizer

RSNR_FLOOR = 1e-300
SEED_MASK = (1 << 64) - 1


def derive_seed(*parts: object) -> int:
    """Truncated SHA-256 of the parts, as an unsigned 64-bit integer."""

    digest = hashlib.sha256("|".join(str(part) for part in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _stream(seed: int, purpose: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(derive_seed(seed & SEED_MASK, purpose)))


def gaussian(rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
    """Standard normals by Box-Muller on the generator's uniforms."""

    count = int(np.prod(size))
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1], keeps the log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    samples = np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))
    return samples[:count].reshape(size)


@dataclass(frozen=True, eq=False)
class Problem:
    phi: np.ndarray
    x_true: np.ndarray
    clean_measurements: np.ndarray
    noisy_measurements: np.ndarray
    master_seed: int
    sparsity: int
    y: Optional[np.ndarray] = None
    corrupted_indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))

    @property
    def m(self) -> int:
        return int(self.phi.shape[0])

    @property
    def n(self) -> int:
        return int(self.phi.shape[1])

    def quantized(self, quantizer: Quantizer) -> "Problem":
        return replace(self, y=quantizer.quantize(self.noisy_measurements))


def gen_problem(n: int, m: int, k: int, seed: int) -> Problem:
    if k < 1 or k > n:
        raise DimensionError(f"sparsity {k} must lie in 1..{n}")
    if m < 1:
        raise DimensionError(f"need at least one measurement, got {m}")
    phi = gaussian(_stream(seed, "phi"), (m, n))
    support = np.sort(_stream(seed, "support").choice(n, size=k, replace=False))
    x_true = np.zeros(n)
    amplitudes = gaussian(_stream(seed, "amplitudes"), k)
    x_true[support] = amplitudes / np.linalg.norm(amplitudes)
    clean = phi @ x_true
    return Problem(
        phi=phi,
        x_true=x_true,
        clean_measurements=clean,
        noisy_measurements=clean.copy(),
        master_seed=seed,
        sparsity=k,
    )


def add_noise(problem: Problem, isnr_db: float, seed: int) -> Problem:
    """Add Gaussian noise rescaled so the measurement-domain SNR is exactly isnr_db."""

    if math.isinf(isnr_db) and isnr_db > 0:
        return replace(problem, noisy_measurements=problem.clean_measurements.copy())
    if not isnr_db > 0:
        raise ValueError(f"ISNR must be positive or inf, got {isnr_db}")
    clean = problem.clean_measurements
    noise = gaussian(_stream(seed, "noise"), clean.size)
    noise_norm = np.linalg.norm(noise)
    target = np.linalg.norm(clean) / 10.0 ** (isnr_db / 20.0)
    noise = noise * (target / noise_norm) if noise_norm > 0 else noise
    return replace(problem, noisy_measurements=clean + noise)


def corruption_count(fraction: float, m: int) -> int:
    # the small offset keeps products such as 0.29 * 100 from flooring to 28
    return int(math.floor(fraction * m + 1e-9))


def corrupt(problem: Problem, fraction: float, seed: int) -> Problem:
    """Negate floor(fraction * M) pre-quantization measurements chosen without replacement."""

    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"corruption fraction must lie in [0, 1], got {fraction}")
    count = corruption_count(fraction, problem.m)
    if count == 0:
        return replace(problem, corrupted_indices=np.empty(0, dtype=np.intp))
    indices = np.sort(_stream(seed, "corruption").choice(problem.m, size=count, replace=False))
    noisy = problem.noisy_measurements.copy()
    noisy[indices] = -noisy[indices]
    return replace(problem, noisy_measurements=noisy, corrupted_indices=indices.astype(np.intp))


def rsnr(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Reconstruction SNR in dB; +inf when the error energy is below 1e-300."""

    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise DimensionError(f"length mismatch: {estimate.shape} vs {truth.shape}")
    error = float(np.sum((estimate - truth) ** 2))
    if error < RSNR_FLOOR:
        return math.inf
    signal = float(np.sum(truth**2))
    if signal == 0.0:
        return -math.inf
    return 10.0 * math.log10(signal / error)


__all__ = [
    "Problem",
    "add_noise",
    "corrupt",
    "corruption_count",
    "derive_seed",
    "gaussian",
    "gen_problem",
    "rsnr",
]
