"""Drive noise and calibration drift.

Telegraph noise multiplies the Rabi drives by (1 + eps(t)), eps switching
between +A and -A after exponentially distributed holding times.
"""

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, fields

import numpy as np
import scipy.linalg

from dissipnet.errors import InvalidStateError, SolverError
from dissipnet.lindblad import liouvillian, spectral_gap, steady_state, unvec, vec
from dissipnet.log import logger
from dissipnet.metrics import concurrence, concurrence_matrix
from dissipnet.models import PairParams, build_reduced

BURN_IN_GAPS = 20.0
WINDOW_GAPS = 50.0
STEP_GAP_FRACTION = 0.05
STEP_SWITCH_FRACTION = 0.1
N_SAMPLES = 200


class NoiseSymmetry(str, enum.Enum):
    ANTISYMMETRIC = "antisymmetric"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class RtnProcess:
    amplitude: float
    switch_rate: float
    seed: int = 0
    symmetry: NoiseSymmetry = NoiseSymmetry.ANTISYMMETRIC

    def __post_init__(self):
        object.__setattr__(self, "symmetry", NoiseSymmetry(self.symmetry))
        if self.amplitude < 0 or self.switch_rate < 0:
            msg = f"Noise amplitude and switch rate must be non-negative, got {self.amplitude}, {self.switch_rate}"
            raise ValueError(msg)

    def drives(self, params: PairParams, eps: float) -> PairParams:
        second = eps if self.symmetry is NoiseSymmetry.SYMMETRIC else -eps
        return params.replace(alpha1=params.alpha1 * (1 + eps), alpha2=params.alpha2 * (1 + second))


@dataclass(frozen=True)
class RtnSignal:
    times: np.ndarray
    values: np.ndarray
    switch_times: np.ndarray


def sample_rtn(process: RtnProcess, duration: float, step: float, trajectory: int = 0) -> RtnSignal:
    """Telegraph signal on the grid 0, step, 2 step, ... below ``duration``.

    Each grid point carries the value at its left endpoint. The generator is
    seeded with (seed, trajectory) so trajectories do not depend on run order.
    """
    if duration <= 0 or step <= 0:
        msg = f"Duration and step must be positive, got {duration}, {step}"
        raise ValueError(msg)
    rng = np.random.default_rng([process.seed, trajectory])
    sign = 2 * rng.integers(2) - 1
    times = np.arange(math.ceil(duration / step)) * step

    switch_times = np.empty(0)
    if process.switch_rate > 0:
        mean_hold = 1 / process.switch_rate
        expected = duration / mean_hold
        holds = rng.exponential(mean_hold, size=int(expected + 10 * math.sqrt(expected) + 10))
        while holds.sum() <= duration:
            holds = np.concatenate([holds, rng.exponential(mean_hold, size=holds.size)])
        switch_times = np.cumsum(holds)
        switch_times = switch_times[switch_times < duration]

    parity = np.searchsorted(switch_times, times, side="right") % 2
    values = process.amplitude * sign * np.where(parity == 0, 1.0, -1.0)
    return RtnSignal(times, values, switch_times)


@dataclass(frozen=True)
class NoiseResult:
    mean_concurrence: float
    std_error: float
    n_trajectories: int
    time_window: float


def noisy_steady_concurrence(
    params: PairParams,
    process: RtnProcess,
    n_traj: int = 100,
    window: float | None = None,
    burn_in: float | None = None,
    step: float | None = None,
) -> NoiseResult:
    """Trajectory-averaged concurrence under telegraph noise on the drives.

    Every trajectory starts in the noiseless steady state, runs through the
    burn-in, then concurrence is averaged over ``window``.
    """
    if n_traj < 1:
        msg = f"Need at least one trajectory, got {n_traj}"
        raise ValueError(msg)
    noiseless = liouvillian(build_reduced(params))
    rho_ss = steady_state(noiseless)
    gap = spectral_gap(noiseless)
    window = window if window is not None else WINDOW_GAPS / gap
    burn_in = burn_in if burn_in is not None else BURN_IN_GAPS / gap
    if step is None:
        step = STEP_GAP_FRACTION / gap
        if process.switch_rate > 0:
            step = min(step, STEP_SWITCH_FRACTION / process.switch_rate)

    propagators = {}
    for sign in (1, -1):
        generator = liouvillian(build_reduced(process.drives(params, sign * process.amplitude)))
        propagators[sign] = scipy.linalg.expm(generator.matrix * step)
    n_burn = math.ceil(burn_in / step)
    n_window = max(1, math.ceil(window / step))
    stride = max(1, n_window // N_SAMPLES)
    duration = (n_burn + n_window) * step
    logger.debug(
        f"Noise run: gap {gap:.4g}, step {step:.4g}, {n_burn} burn-in and {n_window} window steps, "
        f"{n_traj} trajectories"
    )

    signs = np.stack(
        [np.sign(sample_rtn(process, duration, step, trajectory).values) for trajectory in range(n_traj)]
    )
    signs[signs == 0] = 1
    states = np.tile(vec(rho_ss.matrix), (n_traj, 1))
    dim = rho_ss.space.total_dim
    averages = np.zeros(n_traj)
    n_recorded = 0
    for k in range(signs.shape[1]):
        for sign, propagator in propagators.items():
            mask = signs[:, k] == sign
            states[mask] = states[mask] @ propagator.T
        if k >= n_burn and (k - n_burn) % stride == 0:
            for index, state in enumerate(states):
                rho = unvec(state, dim)
                averages[index] += concurrence_matrix(0.5 * (rho + rho.conj().T))
            n_recorded += 1
    averages /= n_recorded

    std_error = float(averages.std(ddof=1) / math.sqrt(n_traj)) if n_traj > 1 else 0.0
    return NoiseResult(float(averages.mean()), std_error, n_traj, window)


@dataclass(frozen=True)
class CalibrationSurface:
    fields: tuple[str, str]
    deviations: tuple[np.ndarray, np.ndarray]
    concurrences: np.ndarray
    degenerate: np.ndarray


def calibration_scan(
    params: PairParams,
    axis1: tuple[str, Sequence[float]],
    axis2: tuple[str, Sequence[float]],
) -> CalibrationSurface:
    """Steady concurrence with two fields scaled by (1 + d1) and (1 + d2)."""
    names = {field.name for field in fields(PairParams)} - {"architecture"}
    for name, _ in (axis1, axis2):
        if name not in names:
            msg = f"Unknown parameter field {name!r} for a calibration scan"
            raise ValueError(msg)

    (first, grid1), (second, grid2) = axis1, axis2
    grid1, grid2 = np.asarray(grid1, dtype=float), np.asarray(grid2, dtype=float)
    values = np.zeros((grid1.size, grid2.size))
    degenerate = np.zeros((grid1.size, grid2.size), dtype=bool)
    for i, d1 in enumerate(grid1):
        for j, d2 in enumerate(grid2):
            shifted = params.replace(**{first: getattr(params, first) * (1 + d1)})
            shifted = shifted.replace(**{second: getattr(shifted, second) * (1 + d2)})
            try:
                values[i, j] = concurrence(steady_state(liouvillian(build_reduced(shifted))))
            except (SolverError, InvalidStateError) as err:
                logger.error(f"Calibration point ({first}={d1:+.3f}, {second}={d2:+.3f}) is degenerate: {err}")
                degenerate[i, j] = True
        logger.verbose(f"Calibration row {i + 1}/{grid1.size} done")
    return CalibrationSurface((first, second), (grid1, grid2), values, degenerate)
