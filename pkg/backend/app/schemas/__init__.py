from .run_config import GridBlock, OutputBlock, QuantizerBlock, RunConfig, SolverBlock

__all__ = [
    "GridBlock",
    "OutputBlock",
    "QuantizerBlock",
    "RunConfig",
    "SolverBlock",
]
