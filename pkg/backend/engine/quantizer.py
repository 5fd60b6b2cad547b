from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import DimensionError, QuantizationError

DEFAULT_SATURATION = 3.0
LEVEL_RTOL = 1e-12


@dataclass(frozen=True)
class Region:
    """The interval f_Q^{-1}(level) = [lower, upper)."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise QuantizationError(f"empty region [{self.lower}, {self.upper})")

    def contains(self, value: float) -> bool:
        return self.lower <= value < self.upper


class Quantizer(Protocol):
    """What the solvers need from a scalar quantizer."""

    bit_depth: int

    @property
    def interior_thresholds(self) -> np.ndarray: ...

    def quantize(self, z: np.ndarray) -> np.ndarray: ...

    def clip_to_regions(self, z: np.ndarray, y: np.ndarray) -> np.ndarray: ...

    def level_weights(self) -> np.ndarray: ...

    def validate_levels(self, y: np.ndarray) -> None: ...


@dataclass(frozen=True)
class QuantizerSpec:
    """Scalar quantizer defined by a threshold partition of the real line.

    ``thresholds`` holds Q+1 entries starting at -inf and ending at +inf,
    ``levels`` holds Q entries with ``thresholds[i] <= levels[i] < thresholds[i+1]``.
    A value z maps to ``levels[i]`` iff ``thresholds[i] <= z < thresholds[i+1]``.
    """

    thresholds: tuple[float, ...]
    levels: tuple[float, ...]
    bit_depth: int
    _interior: np.ndarray = field(init=False, repr=False, compare=False)
    _levels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        thresholds = tuple(float(t) for t in self.thresholds)
        levels = tuple(float(m) for m in self.levels)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "levels", levels)
        if self.bit_depth < 1:
            raise QuantizationError(f"bit depth must be positive, got {self.bit_depth}")
        count = 2**self.bit_depth
        if len(levels) != count or len(thresholds) != count + 1:
            raise QuantizationError(
                f"a {self.bit_depth}-bit quantizer needs {count} levels and {count + 1} thresholds"
            )
        if thresholds[0] != -np.inf or thresholds[-1] != np.inf:
            raise QuantizationError("outer thresholds must be -inf and +inf")
        if any(np.isnan(thresholds)) or any(not np.isfinite(m) for m in levels):
            raise QuantizationError("thresholds and levels must be numbers, levels finite")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise QuantizationError("thresholds must be strictly increasing")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise QuantizationError("levels must be strictly increasing")
        for index, level in enumerate(levels):
            if not thresholds[index] <= level < thresholds[index + 1]:
                raise QuantizationError(f"level {level} lies outside its own region")
        interior = np.array(thresholds[1:-1], dtype=np.float64)
        interior.setflags(write=False)
        level_array = np.array(levels, dtype=np.float64)
        level_array.setflags(write=False)
        object.__setattr__(self, "_interior", interior)
        object.__setattr__(self, "_levels", level_array)

    @property
    def interior_thresholds(self) -> np.ndarray:
        return self._interior

    @property
    def level_array(self) -> np.ndarray:
        return self._levels

    def quantize(self, z: np.ndarray) -> np.ndarray:
        values = np.asarray(z, dtype=np.float64)
        if np.isnan(values).any():
            raise QuantizationError("cannot quantize NaN")
        # side="right" counts thresholds <= z, so a boundary value goes to the upper bin
        return self._levels[np.searchsorted(self._interior, values, side="right")]

    def level_indices(self, y: np.ndarray) -> np.ndarray:
        """Map level values back to their bin indices, rejecting anything else."""

        values = np.asarray(y, dtype=np.float64)
        upper = np.clip(np.searchsorted(self._levels, values, side="left"), 0, len(self._levels) - 1)
        lower = np.clip(upper - 1, 0, len(self._levels) - 1)
        scale = np.maximum(np.abs(values), np.abs(self._levels).max())
        tolerance = LEVEL_RTOL * scale
        upper_hit = np.abs(self._levels[upper] - values) <= tolerance
        lower_hit = np.abs(self._levels[lower] - values) <= tolerance
        if not np.all(upper_hit | lower_hit):
            bad = values[~(upper_hit | lower_hit)]
            raise QuantizationError(
                f"value {bad[0]!r} is not a quantization level (corrupted or foreign measurement)"
            )
        return np.where(upper_hit, upper, lower)

    def validate_levels(self, y: np.ndarray) -> None:
        self.level_indices(y)

    def region_of(self, level: float) -> Region:
        index = int(self.level_indices(np.array([level]))[0])
        return Region(lower=self.thresholds[index], upper=self.thresholds[index + 1])

    def clip_to_regions(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Euclidean projection of z onto the closed box of y's regions."""

        values = np.asarray(z, dtype=np.float64)
        measured = np.asarray(y, dtype=np.float64)
        if values.shape != measured.shape:
            raise DimensionError(f"length mismatch: z has {values.shape}, y has {measured.shape}")
        index = self.level_indices(measured)
        bounds = np.asarray(self.thresholds, dtype=np.float64)
        return np.clip(values, bounds[index], bounds[index + 1])

    def level_weights(self) -> np.ndarray:
        return np.diff(self._levels)


@dataclass(frozen=True)
class PassthroughQuantizer:
    """Identity quantizer: every real is its own level and its own region."""

    bit_depth: int = 64

    @property
    def interior_thresholds(self) -> np.ndarray:
        return np.empty(0, dtype=np.float64)

    def quantize(self, z: np.ndarray) -> np.ndarray:
        values = np.asarray(z, dtype=np.float64)
        if np.isnan(values).any():
            raise QuantizationError("cannot quantize NaN")
        return values

    def clip_to_regions(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        values = np.asarray(z, dtype=np.float64)
        measured = np.asarray(y, dtype=np.float64)
        if values.shape != measured.shape:
            raise DimensionError(f"length mismatch: z has {values.shape}, y has {measured.shape}")
        return measured.copy()

    def level_weights(self) -> np.ndarray:
        return np.empty(0, dtype=np.float64)

    def validate_levels(self, y: np.ndarray) -> None:
        if np.isnan(np.asarray(y, dtype=np.float64)).any():
            raise QuantizationError("measurements contain NaN")


def build_sign_quantizer() -> QuantizerSpec:
    return QuantizerSpec(thresholds=(-np.inf, 0.0, np.inf), levels=(-1.0, 1.0), bit_depth=1)


def build_uniform_quantizer(bit_depth: int, saturation: float = DEFAULT_SATURATION) -> QuantizerSpec:
    """Uniform midpoint quantizer on [-saturation, saturation] with saturating end bins."""

    if bit_depth < 1:
        raise QuantizationError(f"bit depth must be positive, got {bit_depth}")
    if not saturation > 0 or not np.isfinite(saturation):
        raise QuantizationError(f"saturation must be a positive number, got {saturation}")
    count = 2**bit_depth
    spacing = 2.0 * saturation / count
    interior = [-saturation + spacing * j for j in range(1, count)]
    levels = [-saturation + spacing * (i + 0.5) for i in range(count)]
    return QuantizerSpec(
        thresholds=(-np.inf, *interior, np.inf),
        levels=tuple(levels),
        bit_depth=bit_depth,
    )


def quantizer_for_bits(
    bit_depth: int, saturation: float = DEFAULT_SATURATION, one_bit_sign: bool = True
) -> QuantizerSpec:
    """Quantizer used by the experiments: sign at one bit, uniform otherwise."""

    if bit_depth == 1 and one_bit_sign:
        return build_sign_quantizer()
    return build_uniform_quantizer(bit_depth, saturation)


__all__ = [
    "DEFAULT_SATURATION",
    "PassthroughQuantizer",
    "Quantizer",
    "QuantizerSpec",
    "Region",
    "build_sign_quantizer",
    "build_uniform_quantizer",
    "quantizer_for_bits",
]
