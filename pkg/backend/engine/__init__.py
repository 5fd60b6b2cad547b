from .catalog import CatalogRow, CellSummary, best_catalog, summarize
from .errors import DimensionError, QuantizationError
from .executor import (
    ALGORITHMS,
    ReconstructionEngine,
    SolverOptions,
    SweepCell,
    SweepGrid,
    TrialExecutor,
    TrialRecord,
    run_sweep,
    run_trial,
)
from .problem import Problem, add_noise, corrupt, gen_problem, rsnr
from .projection import ProjectionMode, pcoeff, project_consistent, resid
from .quantizer import PassthroughQuantizer, QuantizerSpec, build_uniform_quantizer, quantizer_for_bits
from .solvers import SolverConfig, SolverResult, aop_qiht, qcosamp, qiht, qsp

__all__ = [
    "ALGORITHMS",
    "CatalogRow",
    "CellSummary",
    "DimensionError",
    "PassthroughQuantizer",
    "Problem",
    "ProjectionMode",
    "QuantizationError",
    "QuantizerSpec",
    "ReconstructionEngine",
    "SolverConfig",
    "SolverOptions",
    "SolverResult",
    "SweepCell",
    "SweepGrid",
    "TrialExecutor",
    "TrialRecord",
    "add_noise",
    "aop_qiht",
    "best_catalog",
    "build_uniform_quantizer",
    "corrupt",
    "gen_problem",
    "pcoeff",
    "project_consistent",
    "qcosamp",
    "qiht",
    "qsp",
    "quantizer_for_bits",
    "resid",
    "rsnr",
    "run_sweep",
    "run_trial",
    "summarize",
]
