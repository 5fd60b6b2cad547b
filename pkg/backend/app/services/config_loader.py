from __future__ import annotations

import logging
from pathlib import Path
from typing import List

import yaml
from pydantic import ValidationError

from ..config import get_settings
from ..errors import ConfigError
from ..schemas import RunConfig

logger = logging.getLogger("qcsbench.loader")


def describe_validation_error(error: ValidationError) -> str:
    problems = []
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"])
        message = item["msg"].removeprefix("Value error, ")
        problems.append(f"{key}: {message}" if key else message)
    return "; ".join(problems)


class SweepConfigLoader:
    """Loads and validates sweep documents from YAML files."""

    def __init__(self, directory: Path | None = None):
        self.directory = directory or get_settings().sweeps_dir

    def discover(self) -> List[Path]:
        return sorted(self.directory.glob("*.yaml"))

    def resolve(self, reference: str | Path) -> Path:
        """A path as given, or the name of a shipped sweep document."""

        path = Path(reference)
        if path.exists():
            return path
        for candidate in (self.directory / path.name, self.directory / f"{path.name}.yaml"):
            if candidate.exists():
                return candidate
        raise ConfigError(f"config file not found: {reference}")

    def parse(self, path: str | Path) -> RunConfig:
        path = self.resolve(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        config = self.parse_text(text, source=str(path))
        logger.info("Loaded %s: %d cells, %d algorithms", path.name, len(config.cells()), len(config.algorithms))
        return config

    def parse_text(self, text: str, source: str = "<config>") -> RunConfig:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{source}: not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: expected a mapping at the top level")
        try:
            return RunConfig.model_validate(data)
        except ValidationError as exc:
            raise ConfigError(f"{source}: {describe_validation_error(exc)}") from exc


def parse_config(path: str | Path) -> RunConfig:
    return SweepConfigLoader().parse(path)


__all__ = ["SweepConfigLoader", "describe_validation_error", "parse_config"]
