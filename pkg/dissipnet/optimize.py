"""Derivative-free maximization of steady-state concurrence."""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from dissipnet.errors import InvalidStateError, SolverError
from dissipnet.lindblad import LindbladModel, liouvillian, steady_state
from dissipnet.log import logger
from dissipnet.metrics import concurrence
from dissipnet.models import (
    Architecture,
    PairParams,
    Regime,
    analytic_solution,
    apply_loss,
    build_reduced,
    regimes_for,
)
from dissipnet.operators import HilbertSpace, Operator, QubitOpKind, embed, qubit_op

FRESH_TOL = 1e-9
DRIVE_FIELDS = ("alpha1", "alpha2", "delta1", "delta2", "s1", "s2")
DRIVE_PHASE_FIELDS = ("alpha1_im", "alpha2_im")
IMAG_SUFFIX = "_im"
DEFAULT_BOUNDS = {
    "alpha1": (-10.0, 10.0),
    "alpha2": (-10.0, 10.0),
    "alpha1_im": (-10.0, 10.0),
    "alpha2_im": (-10.0, 10.0),
    "delta1": (-10.0, 10.0),
    "delta2": (-10.0, 10.0),
    "s1": (0.0, 10.0),
    "s2": (0.0, 10.0),
    "phi": (0.0, 2 * math.pi),
}


@dataclass(frozen=True)
class OptimizeSpec:
    free_params: tuple[str, ...] = DRIVE_FIELDS
    bounds: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    seeds: tuple[PairParams, ...] = ()
    restarts: int = 5
    tol_f: float = 1e-8
    tol_x: float = 1e-8
    max_evals: int = 2000

    def __post_init__(self):
        if self.restarts < 1:
            msg = f"Need at least one restart, got {self.restarts}"
            raise ValueError(msg)
        for name in self.free_params:
            if name not in self.bounds:
                msg = f"No bounds given for free parameter {name}"
                raise ValueError(msg)
            low, high = self.bounds[name]
            if low > high:
                msg = f"Empty bounds [{low}, {high}] for {name}"
                raise ValueError(msg)

    @classmethod
    def for_architecture(cls, architecture: Architecture, **overrides) -> "OptimizeSpec":
        free = DRIVE_FIELDS + DRIVE_PHASE_FIELDS
        if Architecture(architecture) is Architecture.BIDIRECTIONAL:
            free = (*free, "phi")
        return cls(free_params=overrides.pop("free_params", free), **overrides)

    @property
    def bounds_list(self) -> list[tuple[float, float]]:
        return [self.bounds[name] for name in self.free_params]


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    value: float
    evaluations: int
    converged: bool


def nelder_mead(objective: Callable[[np.ndarray], float], x0: Sequence[float], spec: OptimizeSpec) -> SimplexResult:
    """Maximize ``objective`` with a bounded Nelder-Mead simplex."""
    x0 = np.clip(np.asarray(x0, dtype=float), *np.array(spec.bounds_list, dtype=float).T)
    start = objective(x0)
    if not np.isfinite(start):
        msg = f"Objective is not finite at the start point {x0}"
        raise ValueError(msg)

    result = scipy.optimize.minimize(
        lambda x: -objective(x),
        x0,
        method="Nelder-Mead",
        bounds=spec.bounds_list,
        options={"xatol": spec.tol_x, "fatol": spec.tol_f, "maxfev": spec.max_evals, "adaptive": False},
    )
    if not result.success:
        logger.warning(f"Simplex stopped after {result.nfev} evaluations: {result.message}")
    if -result.fun < start:
        return SimplexResult(x0, float(start), int(result.nfev), bool(result.success))
    return SimplexResult(np.asarray(result.x), float(-result.fun), int(result.nfev), bool(result.success))


def score(model: LindbladModel) -> float:
    """Steady-state concurrence, or 0 where the steady state is not unique."""
    try:
        return concurrence(steady_state(liouvillian(model)))
    except (SolverError, InvalidStateError, np.linalg.LinAlgError) as err:
        logger.debug(f"Scoring point as 0: {err}")
        return 0.0


def _component(params: PairParams, name: str) -> float:
    if name.endswith(IMAG_SUFFIX):
        return float(np.imag(getattr(params, name.removesuffix(IMAG_SUFFIX))))
    return float(np.real(getattr(params, name)))


def _vector(params: PairParams, names: Sequence[str]) -> np.ndarray:
    return np.array([_component(params, name) for name in names], dtype=float)


def _params(base: PairParams, names: Sequence[str], x: np.ndarray, l: float) -> PairParams:  # noqa: E741
    """Write ``x`` into ``base``. Names ending in ``_im`` set the imaginary part of a drive."""
    updates: dict[str, complex | float] = {}
    for name, value in zip(names, x):
        target = name.removesuffix(IMAG_SUFFIX)
        current = updates.get(target, getattr(base, target))
        if name.endswith(IMAG_SUFFIX):
            updates[target] = complex(np.real(current), value)
        elif isinstance(current, complex) and current.imag != 0:
            updates[target] = complex(value, current.imag)
        else:
            updates[target] = float(value)
    return apply_loss(base.replace(**updates), l)


def default_seeds(architecture: Architecture, l: float) -> list[PairParams]:  # noqa: E741
    architecture = Architecture(architecture)
    if architecture is Architecture.SINGLE_CAVITY:
        return [analytic_solution(Regime.SINGLE_FIRST_ORDER, l)]
    return [analytic_solution(regime, l) for regime in regimes_for(architecture)]


@dataclass(frozen=True)
class OptimizationOutcome:
    params: PairParams
    concurrence: float
    evaluations: int
    converged: bool


def maximize_concurrence(
    architecture: Architecture,
    l: float,  # noqa: E741
    spec: OptimizeSpec | None = None,
    extra_seeds: Sequence[PairParams] = (),
) -> OptimizationOutcome:
    architecture = Architecture(architecture)
    spec = spec or OptimizeSpec.for_architecture(architecture)
    names = spec.free_params
    seeds = [*(spec.seeds or default_seeds(architecture, l)), *extra_seeds]

    best: tuple[float, PairParams] | None = None
    evaluations = 0
    converged = True
    for number, seed in enumerate(seeds):
        base = seed.replace(architecture=architecture)

        def objective(x: np.ndarray, base: PairParams = base) -> float:
            return score(build_reduced(_params(base, names, x, l)))

        x = _vector(base, names)
        seed_value = objective(np.clip(x, *np.array(spec.bounds_list, dtype=float).T))
        value = seed_value
        for _ in range(spec.restarts):
            result = nelder_mead(objective, x, spec)
            evaluations += result.evaluations
            converged = converged and result.converged
            x, value = result.x, result.value
        if value < seed_value:
            msg = f"Optimized value {value} fell below seed value {seed_value}"
            raise AssertionError(msg)
        logger.verbose(f"Seed {number}: concurrence {seed_value:.6f} -> {value:.6f}")
        if best is None or value > best[0]:
            best = (value, _params(base, names, x, l))

    value, params = best
    fresh = score(build_reduced(params))
    if abs(fresh - value) > FRESH_TOL:
        msg = f"Recomputed concurrence {fresh} differs from search value {value}"
        raise AssertionError(msg)
    return OptimizationOutcome(params, fresh, evaluations, converged)


def optimize_concurrence(
    architecture: Architecture,
    l: float,  # noqa: E741
    spec: OptimizeSpec | None = None,
) -> tuple[PairParams, float]:
    if not 0 <= l <= 1:
        msg = f"Loss must lie in [0, 1], got {l}"
        raise ValueError(msg)
    outcome = maximize_concurrence(architecture, l, spec)
    return outcome.params, outcome.concurrence


@dataclass(frozen=True)
class SweepResult:
    architecture: Architecture
    losses: tuple[float, ...]
    params: tuple[PairParams | None, ...]
    concurrences: tuple[float, ...]
    evaluations: tuple[int, ...]
    failed: tuple[bool, ...]


def sweep_loss(architecture: Architecture, grid: Sequence[float], spec: OptimizeSpec | None = None) -> SweepResult:
    """Optimize along a loss grid, warm-starting each point from the previous optimum."""
    architecture = Architecture(architecture)
    grid = [float(l) for l in grid]  # noqa: E741
    if any(b <= a for a, b in zip(grid, grid[1:])) or any(not 0 <= l <= 1 for l in grid):  # noqa: E741
        msg = "Loss grid must be strictly increasing within [0, 1]"
        raise ValueError(msg)

    params, values, evaluations, failed = [], [], [], []
    previous = None
    for index, l in enumerate(grid):  # noqa: E741
        warm = [apply_loss(previous, l)] if previous is not None else []
        try:
            outcome = maximize_concurrence(architecture, l, spec, extra_seeds=warm)
        except SolverError as err:
            logger.error(f"{architecture.value} sweep point {index} (loss {l:.4g}) failed: {err}")
            params.append(None)
            values.append(0.0)
            evaluations.append(0)
            failed.append(True)
            continue
        logger.verbose(f"{architecture.value} loss {l:.4g}: concurrence {outcome.concurrence:.6f}")
        previous = outcome.params
        params.append(outcome.params)
        values.append(outcome.concurrence)
        evaluations.append(outcome.evaluations)
        failed.append(False)

    return SweepResult(architecture, tuple(grid), tuple(params), tuple(values), tuple(evaluations), tuple(failed))


TWO_QUBITS = HilbertSpace.qubits(2)
GENERAL_SIZE = 25
GENERAL_BOUNDS = [(-1.0, 1.0)] * 16 + [(-10.0, 10.0)] * 6 + [(0.0, 10.0)] * 2 + [(0.0, 2 * math.pi)]


def _jump(x: np.ndarray, fix_phase: bool) -> np.ndarray:
    op = (x[:4] + 1j * x[4:]).reshape(2, 2)
    norm = np.linalg.norm(op)
    if norm == 0:
        return op
    op = op / norm
    if fix_phase and abs(op[1, 0]) > 0:
        op = op * np.conj(op[1, 0]) / abs(op[1, 0])
    return op


def _local_hamiltonian(h: np.ndarray) -> Operator:
    return sum(
        (weight * qubit_op(kind) for weight, kind in zip(h, (QubitOpKind.X, QubitOpKind.Y, QubitOpKind.Z))),
        Operator.zero(HilbertSpace.qubits(1)),
    )


def general_lindblad_model(x: np.ndarray, l: float) -> LindbladModel:  # noqa: E741
    """Two correlated dissipators D[k1 O1 + eta k2 O2] and D[eta k1 O1 + k2 O2] with local drives.

    ``x`` packs O1 (real then imaginary entries), O2, the Pauli weights of both
    local Hamiltonians, k1, k2 and the channel phase. O1 and O2 are scaled to
    unit Frobenius norm and the common phase is fixed by O1's lower-left entry.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (GENERAL_SIZE,):
        msg = f"General Lindblad vector needs {GENERAL_SIZE} entries, got {x.shape}"
        raise ValueError(msg)
    single = HilbertSpace.qubits(1)
    first = embed(Operator(single, _jump(x[0:8], fix_phase=True)), TWO_QUBITS, 0)
    second = embed(Operator(single, _jump(x[8:16], fix_phase=False)), TWO_QUBITS, 1)
    hamiltonian = embed(_local_hamiltonian(x[16:19]), TWO_QUBITS, 0) + embed(
        _local_hamiltonian(x[19:22]), TWO_QUBITS, 1
    )
    k1, k2, phi = x[22:25]
    eta = math.sqrt(1 - l**2) * np.exp(1j * phi)
    collapse = (k1 * first + eta * k2 * second, eta * k1 * first + k2 * second)
    return LindbladModel(hamiltonian, collapse)


def general_seed(params: PairParams) -> np.ndarray:
    """Vector reproducing a reduced bidirectional model: O_j = sigma^-, kappa_j = s_j / sqrt(1 + |eta|^2)."""
    lowering = np.array([0, 0, 1, 0, 0, 0, 0, 0], dtype=float)
    norm = math.sqrt(1 + params.eta_mag**2)

    def pauli_weights(alpha: complex, delta: float) -> list[float]:
        return [np.real(alpha), -np.imag(alpha), delta / 2]

    return np.concatenate(
        [
            lowering,
            lowering,
            pauli_weights(params.alpha1, params.delta1),
            pauli_weights(params.alpha2, params.delta2),
            [abs(params.s1) / norm, abs(params.s2) / norm, params.phi % (2 * math.pi)],
        ]
    )


@dataclass(frozen=True)
class GeneralLindbladResult:
    x: np.ndarray
    first: np.ndarray
    second: np.ndarray
    concurrence: float
    evaluations: int


def optimize_general_lindblad(
    l: float,  # noqa: E741
    spec: OptimizeSpec | None = None,
    seeds: Sequence[PairParams] = (),
) -> GeneralLindbladResult:
    """Search over arbitrary single-qubit jump operators, seeded from bidirectional parameter sets."""
    if not 0 <= l <= 1:
        msg = f"Loss must lie in [0, 1], got {l}"
        raise ValueError(msg)
    spec = spec or OptimizeSpec()
    names = tuple(f"x{index}" for index in range(GENERAL_SIZE))
    general = OptimizeSpec(
        free_params=names,
        bounds=dict(zip(names, GENERAL_BOUNDS)),
        restarts=spec.restarts,
        tol_f=spec.tol_f,
        tol_x=spec.tol_x,
        max_evals=spec.max_evals,
    )
    starts = [general_seed(seed) for seed in (*seeds, *default_seeds(Architecture.BIDIRECTIONAL, l))]

    def objective(x: np.ndarray) -> float:
        return score(general_lindblad_model(x, l))

    best = None
    evaluations = 0
    for x in starts:
        for _ in range(general.restarts):
            result = nelder_mead(objective, x, general)
            evaluations += result.evaluations
            x = result.x
        if best is None or result.value > best.value:
            best = result

    logger.info(f"General Lindblad search at loss {l:.4g}: concurrence {best.value:.6f}")
    return GeneralLindbladResult(
        best.x,
        _jump(best.x[0:8], fix_phase=True),
        _jump(best.x[8:16], fix_phase=False),
        best.value,
        evaluations,
    )
