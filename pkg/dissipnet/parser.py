import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from dissipnet.errors import ConfigError
from dissipnet.models import CavityParams, PairParams, apply_loss
from dissipnet.noise import NoiseSymmetry
from dissipnet.optimize import OptimizeSpec


class Experiment(str, enum.Enum):
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    FIG5 = "fig5"
    FIG6 = "fig6"
    STEADY_STATE = "steady_state"
    OPTIMIZE = "optimize"
    SWEEP = "sweep"
    GENERAL_LINDBLAD = "general_lindblad"


SECTIONS = {
    Experiment.FIG2: {"grid", "output"},
    Experiment.FIG3: {"grid", "convergence", "output"},
    Experiment.FIG4: {"grid", "optimizer", "output"},
    Experiment.FIG5: {"model", "grid", "noise", "output"},
    Experiment.FIG6: {"model", "grid", "output"},
    Experiment.STEADY_STATE: {"model", "output"},
    Experiment.OPTIMIZE: {"model", "optimizer", "output"},
    Experiment.SWEEP: {"model", "grid", "optimizer", "output"},
    Experiment.GENERAL_LINDBLAD: {"grid", "optimizer", "output"},
}
GRID_KEYS = {
    Experiment.FIG2: {"losses"},
    Experiment.FIG3: {"losses"},
    Experiment.FIG4: {"losses"},
    Experiment.FIG5: {"amplitudes", "switch_rates"},
    Experiment.FIG6: {"deviations", "fields"},
    Experiment.SWEEP: {"losses"},
    Experiment.GENERAL_LINDBLAD: {"losses"},
}
REQUIRES_MODEL = {Experiment.STEADY_STATE, Experiment.OPTIMIZE, Experiment.SWEEP}

COMPLEX_FIELDS = {"alpha1", "alpha2", "s1", "s2"}
RATE_FIELDS = {"alpha1", "alpha2", "delta1", "delta2"}
AMPLITUDE_FIELDS = {"s1", "s2", "gamma_r1", "gamma_r2", "gamma_phi1", "gamma_phi2"}
PLAIN_FIELDS = {"eta_mag", "phi"}
MODEL_KEYS = RATE_FIELDS | AMPLITUDE_FIELDS | PLAIN_FIELDS | {"architecture", "reference_rate", "loss", "cavity"}
CAVITY_KEYS = {"g1", "g2", "kappa1", "kappa2", "cav_delta1", "cav_delta2", "n_max"}
OPTIMIZER_KEYS = {"restarts", "tol_f", "tol_x", "max_evals"}
NOISE_KEYS = {"trajectories", "symmetry", "window"}
CONVERGENCE_KEYS = {"epsilon", "step"}
OUTPUT_KEYS = {"directory"}
GRID_RANGE_KEYS = {"start", "stop", "points", "spacing"}

DEFAULT_LOSSES = tuple(np.geomspace(0.01, 0.95, 25))
DEFAULT_GRID_LOSSES = {
    Experiment.FIG3: tuple(np.geomspace(1e-3, 0.1, 9)),
    Experiment.GENERAL_LINDBLAD: (0.2, 0.5, 0.8),
}
DEFAULT_AMPLITUDES = tuple(np.linspace(0.0, 0.1, 6))
DEFAULT_SWITCH_RATES = tuple(np.logspace(-2, 2, 8))
DEFAULT_DEVIATIONS = tuple(np.linspace(-0.3, 0.3, 13))
# Base model of the noise figures: one cavity, intrinsic relaxation at 15% of s.
DEFAULT_NOISE_LOSS = 0.15


@dataclass(frozen=True)
class GridConfig:
    losses: tuple[float, ...] = DEFAULT_LOSSES
    amplitudes: tuple[float, ...] = DEFAULT_AMPLITUDES
    switch_rates: tuple[float, ...] = DEFAULT_SWITCH_RATES
    deviations: tuple[float, ...] = DEFAULT_DEVIATIONS
    fields: tuple[str, str] = ("s1", "s2")


@dataclass(frozen=True)
class NoiseConfig:
    trajectories: int = 100
    symmetry: NoiseSymmetry = NoiseSymmetry.ANTISYMMETRIC
    window: float | None = None


@dataclass(frozen=True)
class ConvergenceConfig:
    epsilon: float = 1e-2
    step: float = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    seed: int = 0
    model: PairParams | None = None
    loss: float | None = None
    cavity: CavityParams | None = None
    n_max: int | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    optimizer: OptimizeSpec | None = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    output_dir: Path | None = None


class YMLConfigParser:
    """Strict reader of experiment configuration files.

    Unknown or misplaced keys are rejected, naming the key path and its line.
    """

    def __init__(self, config: Path):
        self.__text = Path(config).read_text(encoding="utf-8")
        try:
            self.__content = yaml.load(self.__text, Loader=yaml.SafeLoader) or {}
            self.__root = yaml.compose(self.__text, Loader=yaml.SafeLoader)
        except yaml.YAMLError as err:
            msg = f"{config}: not a valid YAML file: {err}"
            raise ConfigError(msg) from err
        if not isinstance(self.__content, dict):
            msg = f"{config}: top level must be a mapping"
            raise ConfigError(msg)

    def line_of(self, path: tuple[str, ...]) -> int | None:
        node = self.__root
        line = None
        for key in path:
            if not isinstance(node, yaml.MappingNode):
                return line
            for key_node, value_node in node.value:
                if key_node.value == key:
                    line = key_node.start_mark.line + 1
                    node = value_node
                    break
            else:
                return line
        return line

    def error(self, path: tuple[str, ...], message: str) -> ConfigError:
        line = self.line_of(path)
        where = ".".join(path) or "<root>"
        suffix = f" (line {line})" if line is not None else ""
        return ConfigError(f"{where}{suffix}: {message}")

    def _mapping(self, value: Any, path: tuple[str, ...], allowed: set[str]) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.error(path, "expected a mapping")
        for key in value:
            if key not in allowed:
                raise self.error((*path, str(key)), f"unknown key {key!r}, expected one of {sorted(allowed)}")
        return value

    def _number(self, value: Any, path: tuple[str, ...]) -> float:
        # YAML 1.1 reads exponent notation without a dot, e.g. 1e-3, as a string
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise self.error(path, f"expected a number, got {value!r}")
        return float(value)

    def _complex(self, value: Any, path: tuple[str, ...]) -> complex:
        if isinstance(value, list):
            if len(value) != 2:  # noqa: PLR2004
                raise self.error(path, "complex values are given as [re, im]")
            return complex(self._number(value[0], path), self._number(value[1], path))
        return self._number(value, path)

    def _integer(self, value: Any, path: tuple[str, ...], minimum: int = 0) -> int:
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise self.error(path, f"expected an integer >= {minimum}, got {value!r}")
        return value

    def _grid(self, value: Any, path: tuple[str, ...]) -> tuple[float, ...]:
        if isinstance(value, list):
            if not value:
                raise self.error(path, "grid must not be empty")
            return tuple(self._number(item, path) for item in value)
        spec = self._mapping(value, path, GRID_RANGE_KEYS)
        if not {"start", "stop", "points"} <= spec.keys():
            raise self.error(path, "grid ranges need start, stop and points")
        start, stop = self._number(spec["start"], (*path, "start")), self._number(spec["stop"], (*path, "stop"))
        points = self._integer(spec["points"], (*path, "points"), minimum=1)
        spacing = spec.get("spacing", "linear")
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise self.error(path, "log grids need positive bounds")
            return tuple(np.geomspace(start, stop, points))
        if spacing != "linear":
            raise self.error((*path, "spacing"), f"spacing must be 'linear' or 'log', got {spacing!r}")
        return tuple(np.linspace(start, stop, points))

    def parse_experiment(self, requested: Experiment | None = None) -> Experiment:
        if "experiment" not in self.__content:
            if requested is None:
                raise self.error((), "missing 'experiment'")
            return Experiment(requested)
        try:
            experiment = Experiment(self.__content["experiment"])
        except ValueError as err:
            choices = [item.value for item in Experiment]
            raise self.error(("experiment",), f"unknown experiment, expected one of {choices}") from err
        if requested is not None and experiment is not Experiment(requested):
            raise self.error(("experiment",), f"config is for {experiment.value}, not {Experiment(requested).value}")
        return experiment

    def parse_model(
        self, experiment: Experiment
    ) -> tuple[PairParams | None, float | None, CavityParams | None, int | None]:
        raw = self.__content.get("model")
        if raw is None:
            if experiment in REQUIRES_MODEL:
                raise self.error((), f"experiment {experiment.value} needs a 'model' section")
            return None, None, None, None
        model = self._mapping(raw, ("model",), MODEL_KEYS)
        if "reference_rate" not in model:
            raise self.error(("model",), "missing 'reference_rate'")
        rate = self._number(model["reference_rate"], ("model", "reference_rate"))
        if rate <= 0:
            raise self.error(("model", "reference_rate"), "must be positive")

        values = {}
        for key in RATE_FIELDS | AMPLITUDE_FIELDS | PLAIN_FIELDS:
            if key not in model:
                continue
            path = ("model", key)
            value = self._complex(model[key], path) if key in COMPLEX_FIELDS else self._number(model[key], path)
            if key in RATE_FIELDS:
                value = value / rate
            elif key in AMPLITUDE_FIELDS:
                value = value / math.sqrt(rate)
            values[key] = value
        try:
            params = PairParams(architecture=model.get("architecture", "single_cavity"), **values)
        except ValueError as err:
            raise self.error(("model",), str(err)) from err

        loss = None
        if "loss" in model:
            loss = self._number(model["loss"], ("model", "loss"))
            if not 0 <= loss <= 1:
                raise self.error(("model", "loss"), f"loss must lie in [0, 1], got {loss}")
            params = apply_loss(params, loss)

        cavity = None
        n_max = None
        if "cavity" in model:
            path = ("model", "cavity")
            raw_cavity = self._mapping(model["cavity"], path, CAVITY_KEYS)
            if "n_max" in raw_cavity:
                n_max = self._integer(raw_cavity["n_max"], (*path, "n_max"), minimum=2)
            rates = {
                key: self._number(value, (*path, key)) / rate for key, value in raw_cavity.items() if key != "n_max"
            }
            try:
                cavity = CavityParams(drive=params, **rates)
            except (TypeError, ValueError) as err:
                raise self.error(path, str(err)) from err
        return params, loss, cavity, n_max

    def parse_grid(self, experiment: Experiment) -> GridConfig:
        grid = self._mapping(self.__content.get("grid"), ("grid",), GRID_KEYS.get(experiment, set()))
        values = {}
        for key in ("losses", "amplitudes", "switch_rates", "deviations"):
            if key in grid:
                values[key] = self._grid(grid[key], ("grid", key))
        if "losses" in values:
            losses = values["losses"]
            if any(not 0 <= l <= 1 for l in losses) or any(b <= a for a, b in zip(losses, losses[1:])):  # noqa: E741
                raise self.error(("grid", "losses"), "losses must increase strictly within [0, 1]")
        elif experiment in DEFAULT_GRID_LOSSES:
            values["losses"] = DEFAULT_GRID_LOSSES[experiment]
        if "fields" in grid:
            names = grid["fields"]
            if not isinstance(names, list) or len(names) != 2:  # noqa: PLR2004
                raise self.error(("grid", "fields"), "expected two parameter names")
            unknown = [name for name in names if name not in RATE_FIELDS | AMPLITUDE_FIELDS | PLAIN_FIELDS]
            if unknown:
                raise self.error(("grid", "fields"), f"unknown parameter field(s) {unknown}")
            values["fields"] = tuple(names)
        return GridConfig(**values)

    def parse_optimizer(self) -> OptimizeSpec | None:
        if "optimizer" not in self.__content:
            return None
        raw = self._mapping(self.__content["optimizer"], ("optimizer",), OPTIMIZER_KEYS)
        values = {}
        for key in ("restarts", "max_evals"):
            if key in raw:
                values[key] = self._integer(raw[key], ("optimizer", key), minimum=1)
        for key in ("tol_f", "tol_x"):
            if key in raw:
                values[key] = self._number(raw[key], ("optimizer", key))
        return OptimizeSpec(**values)

    def parse_noise(self) -> NoiseConfig:
        raw = self._mapping(self.__content.get("noise"), ("noise",), NOISE_KEYS)
        values = {}
        if "trajectories" in raw:
            values["trajectories"] = self._integer(raw["trajectories"], ("noise", "trajectories"), minimum=2)
        if "window" in raw:
            values["window"] = self._number(raw["window"], ("noise", "window"))
        if "symmetry" in raw:
            try:
                values["symmetry"] = NoiseSymmetry(raw["symmetry"])
            except ValueError as err:
                raise self.error(("noise", "symmetry"), "expected 'antisymmetric' or 'symmetric'") from err
        return NoiseConfig(**values)

    def parse_convergence(self) -> ConvergenceConfig:
        raw = self._mapping(self.__content.get("convergence"), ("convergence",), CONVERGENCE_KEYS)
        values = {key: self._number(raw[key], ("convergence", key)) for key in raw}
        if "epsilon" in values and not 0 < values["epsilon"] < 1:
            raise self.error(("convergence", "epsilon"), "must lie in (0, 1)")
        return ConvergenceConfig(**values)

    def parse_output_dir(self) -> Path | None:
        raw = self._mapping(self.__content.get("output"), ("output",), OUTPUT_KEYS)
        return Path(raw["directory"]) if "directory" in raw else None

    def parse(self, requested: Experiment | None = None) -> ExperimentConfig:
        experiment = self.parse_experiment(requested)
        allowed = SECTIONS[experiment] | {"experiment", "seed"}
        for key in self.__content:
            if key not in allowed:
                raise self.error((str(key),), f"section not used by experiment {experiment.value}")

        model, loss, cavity, n_max = self.parse_model(experiment)
        if experiment is Experiment.OPTIMIZE and loss is None:
            raise self.error(("model",), "experiment optimize needs 'loss'")
        return ExperimentConfig(
            experiment=experiment,
            seed=self._integer(self.__content.get("seed", 0), ("seed",)),
            model=model,
            loss=loss,
            cavity=cavity,
            n_max=n_max,
            grid=self.parse_grid(experiment),
            optimizer=self.parse_optimizer(),
            noise=self.parse_noise(),
            convergence=self.parse_convergence(),
            output_dir=self.parse_output_dir(),
        )
