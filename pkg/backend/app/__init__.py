"""Application layer: settings, config documents, record files, plots and the CLI."""

__all__ = []
