from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from .config import get_settings
from .errors import ConfigError
from .schemas import RunConfig
from .schemas.run_config import parse_isnr
from .services.catalog_report import render_table
from .services.config_loader import SweepConfigLoader, describe_validation_error
from .services.plotting import CurveFilter, render_best_map, render_curves
from .services.records import (
    RECORD_COLUMNS,
    format_value,
    read_catalog,
    read_records,
    read_summary,
    records_to_csv,
    write_catalog,
    write_records,
    write_summary,
)

try:  # dual import roots for tests vs runtime
    from engine.catalog import best_catalog, summarize  # type: ignore
    from engine.executor import ALGORITHMS, SolverOptions, SweepCell, TrialExecutor  # type: ignore
    from engine.projection import ProjectionMode  # type: ignore
except ModuleNotFoundError:  # pragma: no cover
    from backend.engine.catalog import best_catalog, summarize  # type: ignore
    from backend.engine.executor import ALGORITHMS, SolverOptions, SweepCell, TrialExecutor  # type: ignore
    from backend.engine.projection import ProjectionMode  # type: ignore

logger = logging.getLogger("qcsbench.cli")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def configure_logging(level: str | None = None) -> None:
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


def _isnr(text: str) -> float:
    value = parse_isnr(text)
    try:
        value = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a dB value or inf: {text!r}") from exc
    if not value > 0:
        raise argparse.ArgumentTypeError(f"ISNR must be positive or inf, got {text!r}")
    return value


def _step(text: str) -> Optional[float]:
    if text.strip().lower() == "auto":
        return None
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"step size must be a number or auto, got {text!r}") from exc
    if not value > 0:
        raise argparse.ArgumentTypeError(f"step size must be positive, got {text!r}")
    return value


def _csv_list(kind: Callable[[str], Any]) -> Callable[[str], List[Any]]:
    def parse(text: str) -> List[Any]:
        try:
            return [kind(item.strip()) for item in text.split(",") if item.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc

    return parse


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--projection", choices=[mode.value for mode in ProjectionMode])
    parser.add_argument("--mu", type=_step, help="step size, or auto for 1/||Phi||^2")
    parser.add_argument("--max-iters", type=int)
    parser.add_argument("--outlier-budget", type=int, help="AOP-QIHT L; defaults to the true count")
    parser.add_argument("--no-prune", action="store_true", help="QCoSaMP keeps the 2K..3K support")
    parser.add_argument("--consistency-stop", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcsbench", description="Quantized compressed sensing benchmark")
    parser.add_argument("--log-level", default=None, help="overrides QCS_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a single trial and print its record")
    run.add_argument("--alg", required=True, choices=ALGORITHMS)
    run.add_argument("--n", type=int, default=1000)
    run.add_argument("--m", type=int)
    run.add_argument("--total-bits", type=int)
    run.add_argument("--bits", type=int, default=1)
    run.add_argument("--k", type=int, required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--trial", type=int, default=0)
    run.add_argument("--isnr", type=_isnr, default=math.inf)
    run.add_argument("--corruption", type=float, default=0.0)
    run.add_argument("--saturation", type=float, default=3.0)
    run.add_argument("--quantizer", choices=("sign", "uniform"), default="sign", help="one-bit quantizer")
    _add_solver_flags(run)

    sweep = commands.add_parser("sweep", help="run a configured grid and write records.csv and summary.csv")
    sweep.add_argument("--config", required=True, help="YAML path or the name of a shipped sweep")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out-dir", type=Path)
    sweep.add_argument("--trials", type=int)
    sweep.add_argument("--alg", type=_csv_list(str), help="comma separated algorithm list")
    _add_solver_flags(sweep)

    best = commands.add_parser("best", help="best algorithm and bit depth per group")
    best.add_argument("records", type=Path)
    best.add_argument("--group-by", type=_csv_list(str), default=["total_bits", "isnr_db", "k"])
    best.add_argument("--out-dir", type=Path, help="where catalog.csv goes; defaults to the records directory")

    plot = commands.add_parser("plot", help="render an SVG from summary.csv or catalog.csv")
    plot.add_argument("source", type=Path)
    plot.add_argument("--kind", choices=("curves", "map"), default="curves")
    plot.add_argument("--x", dest="x_field", choices=("total_bits", "corruption"), default="total_bits")
    plot.add_argument("--y", dest="y_field", choices=("k", "isnr_db"), default="k")
    plot.add_argument("--alg", type=_csv_list(str))
    plot.add_argument("--bits", type=_csv_list(int))
    plot.add_argument("--k", type=int)
    plot.add_argument("--isnr", type=_isnr)
    plot.add_argument("--n", type=int)
    plot.add_argument("--total-bits", type=int)
    plot.add_argument("--corruption", type=float)
    plot.add_argument("--ceiling", type=float, help="RSNR clip in dB, defaults to QCS_PLOT_CEILING")
    plot.add_argument("--output", type=Path)
    plot.add_argument("--out-dir", type=Path)
    return parser


def _solver_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if getattr(args, "projection", None) is not None:
        overrides["projection"] = args.projection
    if getattr(args, "mu", None) is not None:
        overrides["step_size"] = args.mu
    if getattr(args, "max_iters", None) is not None:
        overrides["max_iterations"] = args.max_iters
    if getattr(args, "outlier_budget", None) is not None:
        overrides["outlier_budget"] = args.outlier_budget
    if getattr(args, "no_prune", False):
        overrides["prune"] = False
    if getattr(args, "consistency_stop", False):
        overrides["consistency_stop"] = True
    return overrides


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    document = config.model_dump(mode="python")
    if args.seed is not None:
        document["master_seed"] = args.seed
    if args.trials is not None:
        document["grid"]["trials"] = args.trials
    if args.alg is not None:
        document["algorithms"] = args.alg
    if args.out_dir is not None:
        document["output"]["out_dir"] = args.out_dir
    document["solver"].update(_solver_overrides(args))
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigError(describe_validation_error(exc)) from exc


def cmd_run(args: argparse.Namespace) -> int:
    if args.m is not None and args.total_bits is not None:
        raise ConfigError("give either --m or --total-bits, not both")
    if args.m is None and args.total_bits is None:
        raise ConfigError("one of --m or --total-bits is required")
    if args.bits < 1:
        raise ConfigError(f"--bits must be positive, got {args.bits}")
    if args.n < 1 or args.k < 1:
        raise ConfigError("--n and --k must be positive")
    if args.k > args.n:
        raise ConfigError(f"sparsity exceeds dimension: K = {args.k} > N = {args.n}")
    if not 0.0 <= args.corruption <= 1.0:
        raise ConfigError(f"--corruption must lie in [0, 1], got {args.corruption}")
    if not args.saturation > 0:
        raise ConfigError(f"--saturation must be positive, got {args.saturation}")
    total_bits = args.total_bits if args.total_bits is not None else args.m * args.bits
    cell = SweepCell(
        bit_depth=args.bits,
        total_bits=total_bits,
        n=args.n,
        k=args.k,
        isnr_db=args.isnr,
        corruption=args.corruption,
    )
    if cell.m < 1:
        raise ConfigError(f"{total_bits} total bits leave no measurement at {args.bits} bits")
    if args.outlier_budget is not None and not 0 <= args.outlier_budget <= cell.m:
        raise ConfigError(f"--outlier-budget must lie in 0..{cell.m}, got {args.outlier_budget}")
    overrides = _solver_overrides(args)
    try:
        options = SolverOptions(
            step_size=overrides.get("step_size"),
            projection_mode=ProjectionMode(overrides.get("projection", ProjectionMode.JOINT)),
            max_iterations=overrides.get("max_iterations"),
            prune=overrides.get("prune", True),
            consistency_stop=overrides.get("consistency_stop", False),
            outlier_budget=overrides.get("outlier_budget"),
            saturation=args.saturation,
            one_bit_sign=args.quantizer == "sign",
        )
        options.solver_config(args.alg, args.k, 0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    record = TrialExecutor(options).run_trial(cell, args.trial, args.alg, args.seed)
    labeled = " ".join(
        f"{name}={format_value(getattr(record, name))}" for name in RECORD_COLUMNS[1:-1]
    )
    print(f"record: {labeled}")
    sys.stdout.write(records_to_csv([record.deterministic()]))
    print(f"runtime_ms={record.runtime_ms:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    loader = SweepConfigLoader()
    config = apply_overrides(loader.parse(args.config), args)
    settings = get_settings()
    out_dir = Path(config.output.out_dir or settings.out_dir)
    record_runtime = settings.record_runtime if config.output.record_runtime is None else config.output.record_runtime
    grid = config.to_grid()
    logger.info("Running %d trials into %s", grid.size, out_dir)
    executor = TrialExecutor(config.solver_options(), max_workers=settings.threads, record_runtime=record_runtime)
    records = executor.run_sweep(grid, config.master_seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.yaml").write_text(config.to_yaml(), encoding="utf-8")
    write_records(out_dir / "records.csv", records)
    write_summary(out_dir / "summary.csv", summarize(records))
    return EXIT_OK


def cmd_best(args: argparse.Namespace) -> int:
    records = read_records(args.records)
    if not records:
        raise ConfigError(f"{args.records} holds no records")
    try:
        rows = best_catalog(records, args.group_by)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = args.out_dir or args.records.parent
    write_catalog(out_dir / "catalog.csv", rows)
    sys.stdout.write(render_table(rows))
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    if args.kind == "map":
        filters = {
            column: value
            for column, value in (
                ("isnr_db", args.isnr),
                ("k", args.k),
                ("n", args.n),
                ("corruption", args.corruption),
            )
            if value is not None and column != args.y_field
        }
        svg = render_best_map(read_catalog(args.source), args.y_field, filters)
        default_name = f"best_map_{args.y_field}.svg"
    else:
        selection = CurveFilter(
            algorithms=args.alg,
            bit_depths=args.bits,
            k=args.k,
            isnr_db=args.isnr,
            n=args.n,
            total_bits=args.total_bits,
            corruption=args.corruption,
        )
        svg = render_curves(read_summary(args.source), args.x_field, args.ceiling, selection)
        default_name = f"rsnr_vs_{args.x_field}.svg"
    output = args.output or (args.out_dir or args.source.parent) / default_name
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(svg, encoding="utf-8")
    logger.info("Wrote %s", output)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "best": cmd_best,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        configure_logging(args.log_level)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        logger.exception("%s failed", args.command)
        return EXIT_INTERNAL


__all__ = ["build_parser", "cmd_best", "cmd_plot", "cmd_run", "cmd_sweep", "main"]
