"""Liouvillian construction, steady states, spectral gaps and time evolution.

Density matrices are vectorized by column stacking, vec(A X B) = (B^T kron A) vec(X).
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from dissipnet.errors import ConvergenceTimeoutError, DegenerateSteadyStateError, InvalidStateError, SolverError
from dissipnet.log import logger
from dissipnet.operators import HilbertSpace, Operator, partial_trace

DEGENERACY_REL_TOL = 1e-8
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8
RESIDUAL_TOL = 1e-9
GAP_STEP_FRACTION = 0.05
HORIZON_GAPS = 100.0


@dataclass(frozen=True, eq=False)
class LindbladModel:
    hamiltonian: Operator
    collapse_ops: tuple[Operator, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "collapse_ops", tuple(self.collapse_ops))
        if not self.hamiltonian.is_hermitian(HERMITIAN_TOL):
            msg = "Hamiltonian is not Hermitian"
            raise ValueError(msg)
        for op in self.collapse_ops:
            if op.space != self.space:
                msg = f"Collapse operator space {op.space.dims} differs from {self.space.dims}"
                raise ValueError(msg)

    @property
    def space(self) -> HilbertSpace:
        return self.hamiltonian.space


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vector).reshape(dim, dim, order="F")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.space.total_dim
        if matrix.shape != (dim, dim):
            msg = f"Density matrix shape {matrix.shape} does not match space dimension {dim}"
            raise InvalidStateError(msg)
        if not np.allclose(matrix, matrix.conj().T, rtol=0, atol=HERMITIAN_TOL):
            msg = "Density matrix is not Hermitian"
            raise InvalidStateError(msg)
        if abs(np.trace(matrix) - 1) > TRACE_TOL:
            msg = f"Density matrix trace is {np.trace(matrix).real:.12g}, expected 1"
            raise InvalidStateError(msg)
        if np.linalg.eigvalsh(matrix).min() < -POSITIVITY_TOL:
            msg = "Density matrix has negative eigenvalues"
            raise InvalidStateError(msg)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_vector(cls, space: HilbertSpace, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(space, np.outer(psi, psi.conj()))

    @classmethod
    def product(cls, space: HilbertSpace, levels: Sequence[int]) -> "DensityMatrix":
        """Pure product of basis states, e.g. levels (1, 1, 0) is ground, ground, vacuum."""
        psi = np.ones(1)
        for dim, level in zip(space.dims, levels, strict=True):
            psi = np.kron(psi, np.eye(dim)[level])
        return cls.from_vector(space, psi)

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> "DensityMatrix":
        return cls(space, np.eye(space.total_dim) / space.total_dim)

    def reduced(self, keep: Sequence[int]) -> "DensityMatrix":
        reduced = partial_trace(Operator(self.space, self.matrix), keep)
        return DensityMatrix(reduced.space, reduced.matrix)


@dataclass(frozen=True, eq=False)
class Superoperator:
    space: HilbertSpace
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.space.total_dim)

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        eigenvalues, eigenvectors = scipy.linalg.eig(self.matrix)
        order = np.argsort(np.abs(eigenvalues))
        return eigenvalues[order], eigenvectors[:, order]

    @cached_property
    def degeneracy_tol(self) -> float:
        largest = np.abs(self.spectrum[0]).max()
        return DEGENERACY_REL_TOL * largest

    @property
    def kernel_dim(self) -> int:
        return int(np.count_nonzero(np.abs(self.spectrum[0]) <= self.degeneracy_tol))


def liouvillian(model: LindbladModel) -> Superoperator:
    if not model.hamiltonian.is_hermitian(HERMITIAN_TOL):
        msg = "Hamiltonian is not Hermitian"
        raise ValueError(msg)

    dim = model.space.total_dim
    identity = np.eye(dim)
    hamiltonian = model.hamiltonian.matrix
    generator = -1j * (np.kron(identity, hamiltonian) - np.kron(hamiltonian.T, identity))
    for op in model.collapse_ops:
        jump = op.matrix
        rate = jump.conj().T @ jump
        generator += np.kron(jump.conj(), jump) - 0.5 * np.kron(identity, rate) - 0.5 * np.kron(rate.T, identity)
    return Superoperator(model.space, generator)


def _require_unique_kernel(superop: Superoperator) -> None:
    if superop.kernel_dim != 1:
        raise DegenerateSteadyStateError(superop.kernel_dim)


def steady_state(superop: Superoperator) -> DensityMatrix:
    _require_unique_kernel(superop)
    dim = superop.space.total_dim
    rho = unvec(superop.spectrum[1][:, 0], dim)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)

    residual = np.linalg.norm(superop.apply(rho))
    logger.debug(f"Steady state residual {residual:.3e}")
    # bound scales with the spectral radius once it exceeds the reference rate
    if residual > RESIDUAL_TOL * max(1.0, np.abs(superop.spectrum[0]).max()):
        msg = f"Steady state is not a fixed point, residual {residual:.3e}"
        raise SolverError(msg)
    return DensityMatrix(superop.space, rho)


def spectral_gap(superop: Superoperator) -> float:
    _require_unique_kernel(superop)
    eigenvalues = superop.spectrum[0]
    nonzero = eigenvalues[np.abs(eigenvalues) > superop.degeneracy_tol]
    return float(np.min(-nonzero.real))


def propagate(superop: Superoperator, rho0: DensityMatrix, t: float) -> DensityMatrix:
    if t < 0:
        msg = f"Propagation time must be non-negative, got {t}"
        raise ValueError(msg)
    rho = unvec(scipy.linalg.expm(superop.matrix * t) @ vec(rho0.matrix), superop.space.total_dim)
    return DensityMatrix(superop.space, 0.5 * (rho + rho.conj().T))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    difference = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (difference + difference.conj().T))).sum())


def heisenberg_drift(model: LindbladModel, op: Operator) -> Operator:
    """Adjoint generator: i[H, X] + sum_k L_k^+ X L_k - 1/2 {L_k^+ L_k, X}."""
    drift = 1j * model.hamiltonian.commutator(op)
    for jump in model.collapse_ops:
        rate = jump.dag() @ jump
        drift = drift + jump.dag() @ op @ jump - 0.5 * (rate @ op + op @ rate)
    return drift


@dataclass(frozen=True, eq=False)
class Schedule:
    """Piecewise-constant parameter schedule.

    ``model_at(t)`` gives the model held on the step starting at ``t``. After
    ``settle_time`` the schedule must equal ``final``. ``step`` is the spacing
    of parameter switches, infinite for a static schedule.
    """

    model_at: Callable[[float], LindbladModel]
    final: LindbladModel
    step: float = math.inf
    settle_time: float = 0.0
    _final_superop: Superoperator = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_final_superop", liouvillian(self.final))

    @classmethod
    def constant(cls, model: LindbladModel) -> "Schedule":
        return cls(model_at=lambda _: model, final=model)

    @property
    def final_superop(self) -> Superoperator:
        return self._final_superop


def convergence_time(
    schedule: Schedule,
    rho0: DensityMatrix,
    epsilon: float,
    step: float | None = None,
) -> float:
    if not 0 < epsilon < 1:
        msg = f"Convergence threshold must lie in (0, 1), got {epsilon}"
        raise ValueError(msg)

    final = schedule.final_superop
    target = steady_state(final).matrix
    gap = spectral_gap(final)
    horizon = HORIZON_GAPS / gap
    dt = step if step is not None else min(GAP_STEP_FRACTION / gap, schedule.step)
    n_steps = math.ceil(horizon / dt)
    logger.debug(f"Convergence run: gap {gap:.4g}, step {dt:.4g}, {n_steps} steps")

    final_propagator = scipy.linalg.expm(final.matrix * dt)
    state = vec(rho0.matrix)
    distances = np.empty(n_steps + 1)
    distances[0] = trace_distance(rho0.matrix, target)
    for k in range(n_steps):
        t = k * dt
        if t >= schedule.settle_time:
            propagator = final_propagator
        else:
            propagator = scipy.linalg.expm(liouvillian(schedule.model_at(t)).matrix * dt)
        state = propagator @ state
        distances[k + 1] = trace_distance(unvec(state, final.space.total_dim), target)

    if distances[-1] > epsilon:
        raise ConvergenceTimeoutError(horizon, float(distances[-1]))
    outside = np.flatnonzero(distances > epsilon)
    first = 0 if outside.size == 0 else outside[-1] + 1
    return float(first * dt)
