from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from .errors import ConfigError

try:
    from .version import APP_VERSION as _DEFAULT_VERSION
except Exception:  # pragma: no cover
    _DEFAULT_VERSION = "0.1.0"


BACKEND_ROOT = Path(__file__).resolve().parents[1]
PROJECT_ROOT = BACKEND_ROOT.parent
TRUTHY = {"1", "true", "yes", "on"}

# field name -> environment variable
ENVIRONMENT = {
    "threads": "QCS_THREADS",
    "log_level": "QCS_LOG_LEVEL",
    "out_dir": "QCS_OUT_DIR",
    "plot_ceiling_db": "QCS_PLOT_CEILING",
    "record_runtime": "QCS_RECORD_RUNTIME",
    "sweeps_dir": "QCS_SWEEPS_DIR",
}


class Settings(BaseModel):
    """Process-level configuration for the qcsbench command line."""

    app_name: str = "qcsbench"
    version: str = _DEFAULT_VERSION
    threads: int | None = Field(default=None, ge=1)
    log_level: str = "INFO"
    out_dir: Path = Path("results")
    plot_ceiling_db: float = Field(default=60.0, gt=0)
    record_runtime: bool = True
    sweeps_dir: Path = BACKEND_ROOT / "sweeps"
    template_dir: Path = BACKEND_ROOT / "app" / "templates"

    @classmethod
    def load(cls) -> "Settings":
        load_dotenv()
        values: dict[str, object] = {}
        for name, variable in ENVIRONMENT.items():
            raw = os.getenv(variable)
            if raw:
                values[name] = raw.strip()
        if "log_level" in values:
            values["log_level"] = str(values["log_level"]).upper()
        if "record_runtime" in values:
            values["record_runtime"] = str(values["record_runtime"]).lower() in TRUTHY
        try:
            return cls.model_validate(values)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = str(first["loc"][0]) if first["loc"] else ""
            variable = ENVIRONMENT.get(field, field)
            raise ConfigError(f"{variable}={values.get(field)!r}: {first['msg']}") from exc


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.load()
