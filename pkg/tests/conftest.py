import os
import sys
import textwrap
from pathlib import Path
from typing import Callable, List

import pytest

ROOT = Path(__file__).resolve().parents[1]
BACKEND = ROOT / "backend"
if BACKEND.as_posix() not in sys.path:
    sys.path.insert(0, BACKEND.as_posix())

# Environment for tests
os.environ.setdefault("QCS_LOG_LEVEL", "WARNING")
os.environ.setdefault("QCS_THREADS", "2")
os.environ.setdefault("QCS_RECORD_RUNTIME", "false")

from app.cli import main  # noqa: E402

SMOKE_CONFIG = textwrap.dedent(
    """
    schema_version: "1"
    master_seed: 11
    n: 64
    algorithms: [qiht, qsp]
    grid:
      sparsity: [2, 3]
      total_bits: [64, 128]
      isnr_db: [inf, 20]
      bit_depths: [1, 2]
      trials: 2
    solver:
      max_iterations: 30
    output:
      record_runtime: false
    """
).strip()


class CliResult:
    def __init__(self, code: int, stdout: str, stderr: str):
        self.code = code
        self.stdout = stdout
        self.stderr = stderr


@pytest.fixture()
def run_cli(capsys) -> Callable[[List[str]], CliResult]:
    def _run(argv: List[str]) -> CliResult:
        code = main(argv)
        captured = capsys.readouterr()
        return CliResult(code, captured.out, captured.err)

    return _run


@pytest.fixture()
def smoke_config(tmp_path: Path) -> Path:
    path = tmp_path / "smoke.yaml"
    path.write_text(SMOKE_CONFIG + "\n", encoding="utf-8")
    return path
