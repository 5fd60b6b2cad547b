import math
import textwrap
from pathlib import Path

import pytest

from app.errors import ConfigError
from app.schemas import RunConfig
from app.services.config_loader import SweepConfigLoader, parse_config
from engine.projection import ProjectionMode

MINIMAL = textwrap.dedent(
    """
    algorithms: [qiht, qsp]
    grid:
      sparsity: [5]
      total_bits: [500, 1000]
    """
)


@pytest.fixture()
def loader(tmp_path: Path) -> SweepConfigLoader:
    return SweepConfigLoader(directory=tmp_path)


def test_minimal_config_gets_defaults(loader: SweepConfigLoader) -> None:
    config = loader.parse_text(MINIMAL)

    assert config.n == 1000
    assert config.master_seed == 0
    assert config.grid.trials == 20
    assert config.grid.isnr_db == [math.inf]
    assert config.bit_depths == [1]
    assert config.quantizer.saturation == 3.0
    options = config.solver_options()
    assert options.step_size is None
    assert options.projection_mode is ProjectionMode.JOINT
    assert options.one_bit_sign
    assert len(config.cells()) == 2


def test_zero_bits_names_the_key(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match=r"quantizer\.bits"):
        loader.parse_text(MINIMAL + "quantizer:\n  bits: 0\n")


def test_unknown_keys_are_rejected(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match=r"grid\.trails"):
        loader.parse_text(MINIMAL.replace("grid:\n", "grid:\n  trails: 3\n"))


def test_sweep_corruption_above_ten_percent_names_the_key(loader: SweepConfigLoader) -> None:
    assert loader.parse_text(MINIMAL + "  corruption: [0.0, 0.1]\n").grid.corruption == [0.0, 0.1]
    with pytest.raises(ConfigError, match=r"grid\.corruption"):
        loader.parse_text(MINIMAL + "  corruption: [0.0, 0.2]\n")


def test_type_mismatch_names_the_key(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match="master_seed"):
        loader.parse_text(MINIMAL + "master_seed: seven\n")


def test_empty_algorithm_list_is_rejected(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match="algorithms"):
        loader.parse_text(MINIMAL.replace("[qiht, qsp]", "[]"))


def test_sparsity_above_n_is_rejected(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match="exceeds dimension"):
        loader.parse_text(MINIMAL + "n: 4\n")


def test_budget_smaller_than_bit_depth_is_rejected(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match="no measurement"):
        loader.parse_text(MINIMAL.replace("[500, 1000]", "[3]") + "quantizer:\n  bits: 4\n")


@pytest.mark.parametrize("spelling", ["inf", ".inf", "Infinity", "∞"])
def test_infinite_isnr_spellings(loader: SweepConfigLoader, spelling: str) -> None:
    config = loader.parse_text(MINIMAL.replace("grid:\n", f"grid:\n  isnr_db: ['{spelling}', 20]\n"))

    assert config.grid.isnr_db == [math.inf, 20.0]


def test_non_positive_isnr_is_rejected(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match="isnr_db"):
        loader.parse_text(MINIMAL.replace("grid:\n", "grid:\n  isnr_db: [0]\n"))


def test_step_size_auto_and_explicit(loader: SweepConfigLoader) -> None:
    assert loader.parse_text(MINIMAL + "solver:\n  step_size: auto\n").solver.step_size is None
    assert loader.parse_text(MINIMAL + "solver:\n  step_size: 0.01\n").solver.step_size == 0.01


def test_quantizer_bits_replaces_the_grid_depths(loader: SweepConfigLoader) -> None:
    config = loader.parse_text(
        MINIMAL.replace("grid:\n", "grid:\n  bit_depths: [1, 2, 3]\n") + "quantizer:\n  bits: 4\n  kind: uniform\n"
    )

    assert config.bit_depths == [4]
    assert {cell.m for cell in config.cells()} == {125, 250}
    assert not config.solver_options().one_bit_sign


def test_round_trip_through_yaml(loader: SweepConfigLoader) -> None:
    text = MINIMAL.replace("grid:\n", "grid:\n  isnr_db: [inf, 10]\n") + textwrap.dedent(
        """
        master_seed: 18446744073709551615
        solver:
          projection: literal
          outlier_budget: 3
        output:
          out_dir: results/check
        """
    )
    config = loader.parse_text(text)

    again = loader.parse_text(config.to_yaml())

    assert again == config


def test_non_mapping_documents_are_rejected(loader: SweepConfigLoader) -> None:
    with pytest.raises(ConfigError, match="mapping"):
        loader.parse_text("- qiht\n- qsp\n")
    with pytest.raises(ConfigError, match="YAML"):
        loader.parse_text("grid: [unclosed\n")


def test_resolve_by_name(loader: SweepConfigLoader, tmp_path: Path) -> None:
    (tmp_path / "mine.yaml").write_text(MINIMAL, encoding="utf-8")

    assert loader.resolve("mine") == tmp_path / "mine.yaml"
    assert loader.parse("mine.yaml").algorithms == ["qiht", "qsp"]
    assert loader.discover() == [tmp_path / "mine.yaml"]
    with pytest.raises(ConfigError, match="not found"):
        loader.resolve("missing")


def test_shipped_sweeps_parse() -> None:
    shipped = SweepConfigLoader().discover()

    assert {path.stem for path in shipped} >= {"smoke", "corruption_study", "desk_grid"}
    for path in shipped:
        config = parse_config(path)
        assert isinstance(config, RunConfig)
        assert config.output.out_dir is not None


def test_comparison_grid_covers_every_budget_and_noise_level() -> None:
    config = parse_config("comparison_grid")

    assert config.grid.total_bits == [500, *range(1000, 10001, 1000)]
    assert sorted(config.grid.isnr_db) == [10.0, 20.0, 35.0]
    assert config.grid.bit_depths == [1, 2, 3, 4]
    assert config.grid.trials == 20


def test_corruption_study_runs_clean_and_noisy_measurements() -> None:
    config = parse_config("corruption_study")

    assert config.algorithms == ["qiht", "aop-qiht"]
    assert math.inf in config.grid.isnr_db
    assert {10.0, 20.0, 35.0} <= set(config.grid.isnr_db)
    assert config.grid.corruption == [0.0, 0.02, 0.04, 0.06, 0.08, 0.10]


def test_consistent_final_fit_is_off_unless_requested(loader: SweepConfigLoader) -> None:
    assert loader.parse_text(MINIMAL).solver_options().solver_config("qsp", 5, 0).consistent_final_fit is False

    config = loader.parse_text(MINIMAL + "solver:\n  consistent_final_fit: true\n")

    assert config.solver_options().solver_config("qsp", 5, 0).consistent_final_fit is True
