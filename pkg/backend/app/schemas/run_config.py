from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator

try:  # dual import roots for tests vs runtime
    from engine.executor import ALGORITHMS, MAX_SWEEP_CORRUPTION, SolverOptions, SweepCell, SweepGrid  # type: ignore
    from engine.projection import ProjectionMode  # type: ignore
except ModuleNotFoundError:  # pragma: no cover
    from backend.engine.executor import ALGORITHMS, MAX_SWEEP_CORRUPTION, SolverOptions, SweepCell, SweepGrid  # type: ignore
    from backend.engine.projection import ProjectionMode  # type: ignore

SCHEMA_VERSION = "1"
INFINITY_SPELLINGS = {"inf", "+inf", ".inf", "+.inf", "infinity", "∞"}

Algorithm = Literal["qiht", "aop-qiht", "qcosamp", "qsp", "iht", "biht", "cosamp", "sp"]


def parse_isnr(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in INFINITY_SPELLINGS:
        return math.inf
    return value


def parse_step_size(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() == "auto":
        return None
    return value


IsnrDb = Annotated[float, BeforeValidator(parse_isnr), Field(gt=0)]
SweepFraction = Annotated[float, Field(ge=0.0, le=MAX_SWEEP_CORRUPTION)]
PositiveInt = Annotated[int, Field(ge=1)]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridBlock(_Block):
    sparsity: List[PositiveInt] = Field(min_length=1)
    total_bits: List[PositiveInt] = Field(min_length=1)
    isnr_db: List[IsnrDb] = Field(default_factory=lambda: [math.inf], min_length=1)
    bit_depths: List[PositiveInt] = Field(default_factory=lambda: [1], min_length=1)
    corruption: List[SweepFraction] = Field(default_factory=lambda: [0.0], min_length=1)
    trials: PositiveInt = 20


class QuantizerBlock(_Block):
    kind: Literal["sign", "uniform"] = Field(
        default="sign", description="Quantizer used at one bit; deeper bit depths are always uniform"
    )
    bits: Optional[PositiveInt] = Field(default=None, description="Replaces grid.bit_depths when set")
    saturation: float = Field(default=3.0, gt=0)


class SolverBlock(_Block):
    step_size: Annotated[Optional[float], BeforeValidator(parse_step_size)] = Field(default=None, gt=0)
    projection: Literal["literal", "joint"] = "joint"
    max_iterations: Optional[PositiveInt] = None
    prune: bool = True
    consistency_stop: bool = False
    consistent_final_fit: bool = False
    outlier_budget: Optional[int] = Field(default=None, ge=0)
    projection_max_iter: PositiveInt = 50
    projection_tol: float = Field(default=1e-6, gt=0)


class OutputBlock(_Block):
    out_dir: Optional[Path] = None
    record_runtime: Optional[bool] = None


class RunConfig(_Block):
    schema_version: Union[str, int] = SCHEMA_VERSION
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    n: PositiveInt = 1000
    algorithms: List[Algorithm] = Field(min_length=1)
    grid: GridBlock
    quantizer: QuantizerBlock = Field(default_factory=QuantizerBlock)
    solver: SolverBlock = Field(default_factory=SolverBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    @field_validator("schema_version")
    @classmethod
    def _known_schema(cls, value: Union[str, int]) -> str:
        if str(value) != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value!r}; expected {SCHEMA_VERSION!r}")
        return SCHEMA_VERSION

    @field_validator("algorithms")
    @classmethod
    def _unique_algorithms(cls, value: List[str]) -> List[str]:
        if len(set(value)) != len(value):
            raise ValueError("algorithms must not repeat")
        return value

    @model_validator(mode="after")
    def _cells_are_valid(self) -> "RunConfig":
        too_sparse = [k for k in self.grid.sparsity if k > self.n]
        if too_sparse:
            raise ValueError(f"grid.sparsity: sparsity {too_sparse[0]} exceeds dimension n = {self.n}")
        for budget in self.grid.total_bits:
            for bits in self.bit_depths:
                if budget // bits < 1:
                    raise ValueError(
                        f"grid.total_bits: {budget} bits leave no measurement at bit depth {bits}"
                    )
        return self

    @property
    def bit_depths(self) -> List[int]:
        if self.quantizer.bits is not None:
            return [self.quantizer.bits]
        return list(self.grid.bit_depths)

    def to_grid(self) -> SweepGrid:
        return SweepGrid(
            sparsity_levels=tuple(self.grid.sparsity),
            total_bits=tuple(self.grid.total_bits),
            bit_depths=tuple(self.bit_depths),
            n=self.n,
            algorithms=tuple(self.algorithms),
            isnr_levels=tuple(self.grid.isnr_db),
            corruption_fractions=tuple(self.grid.corruption),
            trials=self.grid.trials,
        )

    def cells(self) -> List[SweepCell]:
        return self.to_grid().cells()

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            step_size=self.solver.step_size,
            projection_mode=ProjectionMode(self.solver.projection),
            max_iterations=self.solver.max_iterations,
            prune=self.solver.prune,
            consistency_stop=self.solver.consistency_stop,
            consistent_final_fit=self.solver.consistent_final_fit,
            outlier_budget=self.solver.outlier_budget,
            projection_max_iter=self.solver.projection_max_iter,
            projection_tol=self.solver.projection_tol,
            saturation=self.quantizer.saturation,
            one_bit_sign=self.quantizer.kind == "sign",
        )

    def to_document(self) -> dict[str, Any]:
        document = self.model_dump(mode="python")
        output = document["output"]
        if output["out_dir"] is not None:
            output["out_dir"] = Path(output["out_dir"]).as_posix()
        return document

    def to_yaml(self) -> str:
        # PyYAML writes float('inf') as .inf, which parses back to inf
        return yaml.safe_dump(self.to_document(), sort_keys=False, allow_unicode=True)


__all__ = [
    "GridBlock",
    "OutputBlock",
    "QuantizerBlock",
    "RunConfig",
    "SCHEMA_VERSION",
    "SolverBlock",
    "parse_isnr",
]
