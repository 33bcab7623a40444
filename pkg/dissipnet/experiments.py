"""Figure and utility experiments, each writing CSV tables plus an SVG figure."""

from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dissipnet.errors import SolverError
from dissipnet.lindblad import DensityMatrix, Schedule, convergence_time, liouvillian, spectral_gap, steady_state
from dissipnet.log import logger
from dissipnet.metrics import bell_fidelity, concurrence, purity
from dissipnet.models import (
    TWO_QUBITS,
    Architecture,
    IntrinsicLoss,
    PairParams,
    Regime,
    analytic_solution,
    analytic_steady_state,
    build_reduced,
    detuning_schedule,
    regimes_for,
    solve_full,
)
from dissipnet.noise import RtnProcess, calibration_scan, noisy_steady_concurrence
from dissipnet.optimize import (
    OptimizeSpec,
    default_seeds,
    maximize_concurrence,
    optimize_general_lindblad,
    score,
    sweep_loss,
)
from dissipnet.output import Heatmap, LinePlot, emit_csv, emit_svg_plot
from dissipnet.parser import DEFAULT_NOISE_LOSS, Experiment, ExperimentConfig

NAIVE_DETUNING = 0.01
REMOTE = (Architecture.CASCADED, Architecture.BIDIRECTIONAL)


def map_ordered(function: Callable, items: Sequence, jobs: int) -> list:
    """Apply ``function`` to every item, in a process pool when jobs > 1, keeping item order."""
    if jobs <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(function, items))


def optimizer_spec(
    config: ExperimentConfig, architecture: Architecture, seeds: Iterable[PairParams] = ()
) -> OptimizeSpec:
    base = config.optimizer or OptimizeSpec()
    return OptimizeSpec.for_architecture(
        architecture,
        seeds=tuple(seeds),
        restarts=base.restarts,
        tol_f=base.tol_f,
        tol_x=base.tol_x,
        max_evals=base.max_evals,
    )


def noise_base(config: ExperimentConfig) -> PairParams:
    if config.model is not None:
        return config.model
    return analytic_solution(Regime.SINGLE_FIRST_ORDER, DEFAULT_NOISE_LOSS)


def _at_point(label: str, function: Callable, *args):
    try:
        return function(*args)
    except SolverError as err:
        msg = f"{label}: {err}"
        raise SolverError(msg) from err


def run_fig2(config: ExperimentConfig, out: Path, _jobs: int) -> list[Path]:
    losses = config.grid.losses
    curves = {"naive": [], "first_order_relaxation": [], "first_order_dephasing": []}
    for l in losses:  # noqa: E741
        naive = PairParams(alpha1=1.0, alpha2=1.0, delta1=NAIVE_DETUNING, delta2=-NAIVE_DETUNING, s1=2.0, s2=2.0)
        points = {
            "naive": naive.replace(gamma_r1=l * 2.0),
            "first_order_relaxation": analytic_solution(Regime.SINGLE_FIRST_ORDER, l),
            "first_order_dephasing": analytic_solution(Regime.SINGLE_FIRST_ORDER, l, IntrinsicLoss.DEPHASING),
        }
        for name, params in points.items():
            curves[name].append(score(build_reduced(params)))
        summary = ", ".join(f"{name} {values[-1]:.4f}" for name, values in curves.items())
        logger.verbose(f"fig2 loss {l:.4g}: {summary}")

    columns = ["loss", *(f"concurrence_{name}" for name in curves)]
    rows = zip(losses, *curves.values())
    plot = LinePlot(losses, curves, "intrinsic loss gamma/s", "steady-state concurrence", logx=True)
    return [emit_csv(columns, rows, out / "fig2.csv"), emit_svg_plot(plot, out / "fig2.svg")]


def _fig3_point(l: float, epsilon: float, step: float) -> tuple[float, float, float]:  # noqa: E741
    params = analytic_solution(Regime.SINGLE_FIRST_ORDER, l)
    model = build_reduced(params)
    value = concurrence(steady_state(liouvillian(model)))
    ground = DensityMatrix.product(TWO_QUBITS, (1, 1))
    static = convergence_time(Schedule.constant(model), ground, epsilon)
    scheduled = convergence_time(detuning_schedule(params, l, step), ground, epsilon)
    return value, static, scheduled


def run_fig3(config: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    settings = config.convergence
    losses = config.grid.losses
    results = map_ordered(
        _Fig3Task(settings.epsilon, settings.step), [(index, l) for index, l in enumerate(losses)], jobs
    )
    for l, (value, static, scheduled) in zip(losses, results):  # noqa: E741
        logger.verbose(f"fig3 loss {l:.4g}: concurrence {value:.4f}, static {static:.4g}, scheduled {scheduled:.4g}")

    columns = ["loss", "concurrence", "time_static", "time_scheduled"]
    rows = [(l, *result) for l, result in zip(losses, results)]  # noqa: E741
    plot = LinePlot(
        [result[0] for result in results],
        {"static detuning": [r[1] for r in results], "exponential schedule": [r[2] for r in results]},
        "steady-state concurrence",
        "convergence time",
        logy=True,
    )
    return [emit_csv(columns, rows, out / "fig3.csv"), emit_svg_plot(plot, out / "fig3.svg")]


@dataclass(frozen=True)
class _Fig3Task:
    epsilon: float
    step: float

    def __call__(self, point: tuple[int, float]) -> tuple[float, float, float]:
        index, l = point  # noqa: E741
        return _at_point(f"fig3 point {index} (loss {l:.4g})", _fig3_point, l, self.epsilon, self.step)


@dataclass(frozen=True)
class _Fig4Task:
    losses: tuple[float, ...]
    config: ExperimentConfig

    def __call__(self, architecture: Architecture) -> tuple[list[float], list[float], list[float]]:
        low_regime, high_regime = regimes_for(architecture)
        low = [score(build_reduced(analytic_solution(low_regime, l))) for l in self.losses]  # noqa: E741
        high = [score(build_reduced(analytic_solution(high_regime, l))) for l in self.losses]  # noqa: E741
        sweep = sweep_loss(architecture, self.losses, optimizer_spec(self.config, architecture))
        logger.info(f"fig4 {architecture.value} curve done, {sum(sweep.evaluations)} evaluations")
        return low, high, list(sweep.concurrences)


def run_fig4(config: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    losses = config.grid.losses
    curves = map_ordered(_Fig4Task(losses, config), list(REMOTE), jobs)
    columns = ["loss", "concurrence_analytic_low", "concurrence_analytic_high", "concurrence_optimized"]

    written = []
    series = {}
    for architecture, (low, high, optimized) in zip(REMOTE, curves):
        written.append(emit_csv(columns, zip(losses, low, high, optimized), out / f"fig4_{architecture.value}.csv"))
        series[f"{architecture.value} optimized"] = optimized
        series[f"{architecture.value} low-loss recipe"] = low
        series[f"{architecture.value} high-loss recipe"] = high
    plot = LinePlot(losses, series, "channel loss l", "steady-state concurrence", logx=True)
    written.append(emit_svg_plot(plot, out / "fig4.svg"))
    return written


@dataclass(frozen=True)
class _NoiseTask:
    params: PairParams
    gap: float
    config: ExperimentConfig

    def __call__(self, point: tuple[int, float, float]):
        index, amplitude, rate = point
        noise = self.config.noise
        process = RtnProcess(amplitude, rate * self.gap, seed=self.config.seed, symmetry=noise.symmetry)
        window = noise.window / self.gap if noise.window is not None else None
        label = f"fig5 point {index} (A={amplitude:.4g}, nu={rate:.4g} gap)"
        result = _at_point(label, noisy_steady_concurrence, self.params, process, noise.trajectories, window)
        logger.verbose(f"{label}: concurrence {result.mean_concurrence:.4f} +- {result.std_error:.4f}")
        return result


def run_fig5(config: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    params = noise_base(config)
    gap = spectral_gap(liouvillian(build_reduced(params)))
    amplitudes, rates = config.grid.amplitudes, config.grid.switch_rates
    points = [(i * len(rates) + j, a, r) for i, a in enumerate(amplitudes) for j, r in enumerate(rates)]
    results = map_ordered(_NoiseTask(params, gap, config), points, jobs)

    columns = ["amplitude", "switch_rate_over_gap", "concurrence_mean", "std_error"]
    rows = [(a, r, result.mean_concurrence, result.std_error) for (_, a, r), result in zip(points, results)]
    surface = np.array([result.mean_concurrence for result in results]).reshape(len(amplitudes), len(rates))
    plot = Heatmap(rates, amplitudes, surface.T, "switch rate / gap", "noise amplitude A", logx=True)
    return [emit_csv(columns, rows, out / "fig5.csv"), emit_svg_plot(plot, out / "fig5.svg")]


def run_fig6(config: ExperimentConfig, out: Path, _jobs: int) -> list[Path]:
    params = noise_base(config)
    first, second = config.grid.fields
    deviations = config.grid.deviations
    surface = calibration_scan(params, (first, deviations), (second, deviations))

    columns = [f"deviation_{first}", f"deviation_{second}", "concurrence", "degenerate"]
    rows = [
        (d1, d2, surface.concurrences[i, j], surface.degenerate[i, j])
        for i, d1 in enumerate(deviations)
        for j, d2 in enumerate(deviations)
    ]
    plot = Heatmap(deviations, deviations, surface.concurrences, f"deviation of {first}", f"deviation of {second}")
    return [emit_csv(columns, rows, out / "fig6.csv"), emit_svg_plot(plot, out / "fig6.svg")]


def _is_symmetric_dark_state(params: PairParams) -> bool:
    return (
        params.architecture is Architecture.SINGLE_CAVITY
        and params.alpha1 == params.alpha2
        and params.s1 == params.s2
        and params.delta1 == -params.delta2
        and not any((params.gamma_r1, params.gamma_r2, params.gamma_phi1, params.gamma_phi2))
    )


def run_steady_state(config: ExperimentConfig, out: Path, _jobs: int) -> list[Path]:
    params = config.model
    superop = liouvillian(build_reduced(params))
    rho = _at_point("reduced model", steady_state, superop)
    rows = [("reduced", concurrence(rho), bell_fidelity(rho), purity(rho), spectral_gap(superop))]
    logger.success(f"Reduced {params.architecture.value} model: concurrence {rows[0][1]:.6f}")
    if _is_symmetric_dark_state(params):
        _, expected = analytic_steady_state(params.delta1, params.alpha1)
        logger.info(f"Dark-state formula gives concurrence {expected:.6f}")

    if config.cavity is not None:
        solution = _at_point("full model", solve_full, config.cavity, params.architecture, config.n_max)
        rows.append(
            ("full", solution.concurrence, bell_fidelity(solution.qubits), purity(solution.qubits), "")
        )
        logger.success(f"Full model (n_max={solution.n_max}): concurrence {solution.concurrence:.6f}")

    columns = ["model", "concurrence", "bell_fidelity", "purity", "spectral_gap"]
    return [emit_csv(columns, rows, out / "steady_state.csv")]


def run_optimize(config: ExperimentConfig, out: Path, _jobs: int) -> list[Path]:
    params = config.model
    architecture = params.architecture
    seeds = (params, *default_seeds(architecture, config.loss))
    outcome = maximize_concurrence(architecture, config.loss, optimizer_spec(config, architecture, seeds))
    logger.success(
        f"Optimized {architecture.value} at loss {config.loss:.4g}: concurrence {outcome.concurrence:.6f} "
        f"after {outcome.evaluations} evaluations"
    )
    fields = {key: value for key, value in outcome.params.as_dict().items() if key != "architecture"}
    rows = [(key, np.real(value), np.imag(value)) for key, value in fields.items()]
    rows.append(("concurrence", outcome.concurrence, 0.0))
    return [emit_csv(["parameter", "real", "imag"], rows, out / "optimize.csv")]


def run_sweep(config: ExperimentConfig, out: Path, _jobs: int) -> list[Path]:
    architecture = config.model.architecture
    losses = config.grid.losses
    sweep = sweep_loss(architecture, losses, optimizer_spec(config, architecture))
    names = ["alpha1", "alpha2", "delta1", "delta2", "s1", "s2", "phi"]
    rows = []
    for l, params, value, evaluations, failed in zip(  # noqa: E741
        losses, sweep.params, sweep.concurrences, sweep.evaluations, sweep.failed
    ):
        settings = [getattr(params, name) if params is not None else 0.0 for name in names]
        drive_phases = [np.imag(settings[0]), np.imag(settings[1])]
        rows.append((l, value, evaluations, failed, *np.real(settings), *drive_phases))

    columns = ["loss", "concurrence", "evaluations", "failed", *names, "alpha1_im", "alpha2_im"]
    plot = LinePlot(losses, {architecture.value: sweep.concurrences}, "channel loss l", "steady-state concurrence")
    name = f"sweep_{architecture.value}"
    return [emit_csv(columns, rows, out / f"{name}.csv"), emit_svg_plot(plot, out / f"{name}.svg")]


@dataclass(frozen=True)
class _GeneralTask:
    config: ExperimentConfig

    def __call__(self, l: float) -> tuple[float, float]:  # noqa: E741
        spec = optimizer_spec(self.config, Architecture.BIDIRECTIONAL)
        bidirectional = maximize_concurrence(Architecture.BIDIRECTIONAL, l, spec)
        general = optimize_general_lindblad(l, spec, seeds=(bidirectional.params,))
        logger.info(
            f"Loss {l:.4g}: bidirectional {bidirectional.concurrence:.4f}, general {general.concurrence:.4f}"
        )
        return bidirectional.concurrence, general.concurrence


def run_general_lindblad(config: ExperimentConfig, out: Path, jobs: int) -> list[Path]:
    losses = config.grid.losses
    results = map_ordered(_GeneralTask(config), list(losses), jobs)
    columns = ["loss", "concurrence_bidirectional", "concurrence_general"]
    rows = [(l, *result) for l, result in zip(losses, results)]  # noqa: E741
    return [emit_csv(columns, rows, out / "general_lindblad.csv")]


EXPERIMENTS: dict[Experiment, Callable[[ExperimentConfig, Path, int], list[Path]]] = {
    Experiment.FIG2: run_fig2,
    Experiment.FIG3: run_fig3,
    Experiment.FIG4: run_fig4,
    Experiment.FIG5: run_fig5,
    Experiment.FIG6: run_fig6,
    Experiment.STEADY_STATE: run_steady_state,
    Experiment.OPTIMIZE: run_optimize,
    Experiment.SWEEP: run_sweep,
    Experiment.GENERAL_LINDBLAD: run_general_lindblad,
}


def run(config: ExperimentConfig, out: Path, jobs: int = 1) -> list[Path]:
    logger.notice(f"Running experiment {config.experiment.value} into {out}")
    written = EXPERIMENTS[config.experiment](config, Path(out), jobs)
    for path in written:
        logger.info(f"Wrote {path}")
    return written
