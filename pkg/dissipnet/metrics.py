import numpy as np

from dissipnet.errors import InvalidStateError
from dissipnet.lindblad import DensityMatrix
from dissipnet.operators import HilbertSpace

TWO_QUBITS = HilbertSpace.qubits(2)
SIGMA_Y_PAIR = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
CLIP_TOL = 1e-8
SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def _clipped_sqrt(eigenvalues: np.ndarray) -> np.ndarray:
    if eigenvalues.min() < -CLIP_TOL:
        msg = f"Eigenvalue {eigenvalues.min():.3e} below clipping threshold, not a valid state"
        raise InvalidStateError(msg)
    return np.sqrt(np.clip(eigenvalues, 0, None))


def concurrence_matrix(rho: np.ndarray) -> float:
    """Wootters concurrence of a raw 4x4 two-qubit density matrix.

    The square roots of the eigenvalues of rho * rho_tilde are the singular values of
    sqrt(rho) (sy x sy) sqrt(rho)^*, so no square root is taken of round-off eigenvalues.
    """
    weights, vectors = np.linalg.eigh(rho)
    sqrt_rho = (vectors * _clipped_sqrt(weights)) @ vectors.conj().T
    lambdas = np.linalg.svd(sqrt_rho @ SIGMA_Y_PAIR @ sqrt_rho.conj(), compute_uv=False)
    return float(max(0.0, lambdas[0] - lambdas[1:].sum()))


def concurrence(rho: DensityMatrix) -> float:
    if rho.space != TWO_QUBITS:
        msg = f"Concurrence needs a two-qubit state, got dims {rho.space.dims}"
        raise ValueError(msg)
    return min(1.0, concurrence_matrix(rho.matrix))


def state_fidelity(rho: DensityMatrix, target: np.ndarray) -> float:
    target = np.asarray(target, dtype=complex)
    if target.shape != (rho.space.total_dim,):
        msg = f"Target of length {target.shape} does not match dimension {rho.space.total_dim}"
        raise ValueError(msg)
    return float(np.vdot(target, rho.matrix @ target).real)


def bell_fidelity(rho: DensityMatrix) -> float:
    """Best overlap with (|up,down> + e^{i theta}|down,up>)/sqrt(2) over theta."""
    if rho.space != TWO_QUBITS:
        msg = f"Bell fidelity needs a two-qubit state, got dims {rho.space.dims}"
        raise ValueError(msg)
    matrix = rho.matrix
    return float(0.5 * (matrix[1, 1] + matrix[2, 2]).real + abs(matrix[1, 2]))


def purity(rho: DensityMatrix) -> float:
    return float(np.trace(rho.matrix @ rho.matrix).real)
