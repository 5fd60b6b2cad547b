import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if ROOT.as_posix() not in sys.path:
    sys.path.insert(0, ROOT.as_posix())

from engine.quantizer import build_sign_quantizer, build_uniform_quantizer  # noqa: E402


@pytest.fixture()
def rng() -> np.random.Generator:
    """Seeded generator so randomized tests are reproducible."""

    return np.random.default_rng(20240521)


@pytest.fixture()
def sign_quantizer():
    return build_sign_quantizer()


@pytest.fixture()
def two_bit_quantizer():
    return build_uniform_quantizer(2, saturation=3.0)


@pytest.fixture()
def make_record():
    """Factory for trial records with sensible defaults for catalog and CSV tests."""

    from engine.executor import TrialRecord

    def _make(algorithm="qiht", bit_depth=1, rsnr_db=10.0, trial=0, total_bits=500, k=5, isnr_db=float("inf")):
        return TrialRecord(
            algorithm=algorithm,
            bit_depth=bit_depth,
            total_bits=total_bits,
            m=total_bits // bit_depth,
            n=100,
            k=k,
            isnr_db=isnr_db,
            corruption=0.0,
            trial=trial,
            seed=trial,
            rsnr_db=rsnr_db,
            iterations=10 + trial,
            mismatch=trial,
        )

    return _make
