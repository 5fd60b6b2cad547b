from __future__ import annotations


class ConfigError(ValueError):
    """Invalid run configuration, usage or input file; the CLI exits with status 2."""


class RecordSchemaError(ConfigError):
    """A records or summary CSV does not carry the expected columns."""

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


__all__ = ["ConfigError", "RecordSchemaError"]
