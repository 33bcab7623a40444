import csv
import math
from pathlib import Path

import pytest

from dissipnet.errors import SolverError
from dissipnet.experiments import map_ordered, noise_base, optimizer_spec, run
from dissipnet.models import Architecture, PairParams
from dissipnet.optimize import OptimizeSpec
from dissipnet.parser import Experiment, ExperimentConfig, GridConfig, NoiseConfig


def read_columns(path: Path) -> dict[str, list[str]]:
    with path.open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return {key: [row[key] for row in rows] for key in rows[0]}


def test_map_ordered__process_pool__keeps_item_order() -> None:
    items = [9.0, 4.0, 1.0, 16.0]
    assert map_ordered(math.sqrt, items, jobs=2) == [3.0, 2.0, 1.0, 4.0]


def test_map_ordered__single_job__serial() -> None:
    assert map_ordered(abs, [-1, 2, -3], jobs=1) == [1, 2, 3]


def test_optimizer_spec__budget_from_config__free_parameters_per_architecture() -> None:
    config = ExperimentConfig(Experiment.FIG4, optimizer=OptimizeSpec(restarts=2, max_evals=100))
    spec = optimizer_spec(config, Architecture.BIDIRECTIONAL)
    assert spec.restarts == 2
    assert spec.max_evals == 100
    assert "phi" in spec.free_params


def test_noise_base__model_given__used() -> None:
    model = PairParams(delta1=0.3, delta2=-0.3)
    assert noise_base(ExperimentConfig(Experiment.FIG5, model=model)) is model
    assert noise_base(ExperimentConfig(Experiment.FIG5)).gamma_r1 > 0


def test_run__fig2__recipe_beats_naive_at_larger_loss(tmp_path: Path) -> None:
    config = ExperimentConfig(Experiment.FIG2, grid=GridConfig(losses=(0.01, 0.05, 0.1)))
    written = run(config, tmp_path)
    assert [path.name for path in written] == ["fig2.csv", "fig2.svg"]

    columns = read_columns(tmp_path / "fig2.csv")
    assert columns["loss"] == ["0.01", "0.05", "0.1"]
    for recipe, naive in zip(columns["concurrence_first_order_relaxation"][1:], columns["concurrence_naive"][1:]):
        assert float(recipe) > float(naive)


def test_run__fig5_tiny_grid__zero_amplitude_row_matches_noiseless(tmp_path: Path) -> None:
    config = ExperimentConfig(
        Experiment.FIG5,
        grid=GridConfig(amplitudes=(0.0,), switch_rates=(1.0,)),
        noise=NoiseConfig(trajectories=2, window=5.0),
    )
    run(config, tmp_path)
    columns = read_columns(tmp_path / "fig5.csv")
    assert len(columns["concurrence_mean"]) == 1
    assert float(columns["std_error"][0]) == pytest.approx(0, abs=1e-9)


def test_run__optimize__parameter_table(tmp_path: Path) -> None:
    model = PairParams(s1=2.0, s2=2.0, delta1=0.2, delta2=-0.2, gamma_r1=0.1)
    config = ExperimentConfig(
        Experiment.OPTIMIZE, model=model, loss=0.05, optimizer=OptimizeSpec(restarts=1, max_evals=200)
    )
    run(config, tmp_path)
    columns = read_columns(tmp_path / "optimize.csv")
    assert columns["parameter"][-1] == "concurrence"
    assert "alpha1" in columns["parameter"]
    assert 0 < float(columns["real"][-1]) <= 1


def test_run__steady_state_degenerate__solver_error_names_model(tmp_path: Path) -> None:
    config = ExperimentConfig(Experiment.STEADY_STATE, model=PairParams())
    with pytest.raises(SolverError, match="reduced model"):
        run(config, tmp_path)


@pytest.mark.slow
def test_run__fig3__schedule_speeds_up_convergence(tmp_path: Path) -> None:
    run(ExperimentConfig(Experiment.FIG3, grid=GridConfig(losses=(0.01,))), tmp_path)
    columns = read_columns(tmp_path / "fig3.csv")
    assert float(columns["time_static"][0]) >= 2 * float(columns["time_scheduled"][0])
