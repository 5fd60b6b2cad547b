from __future__ import annotations


class QuantizationError(ValueError):
    """Raised for invalid quantizers and values that are not quantization levels."""


class DimensionError(ValueError):
    """Raised when matrix, vector or sparsity dimensions disagree."""


__all__ = ["DimensionError", "QuantizationError"]
