"""Tensor-product Hilbert spaces and dense operator algebra.

Basis convention for qubits: index 0 is the excited state (up), index 1 is the
ground state (down). Bosonic modes use the number basis |0>, |1>, ...
Composite spaces order subsystems as listed, the first one being the slowest
varying Kronecker index. Build every composite operator with :func:`embed`.
"""

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cache

import numpy as np

QUBIT_DIM = 2


@dataclass(frozen=True)
class HilbertSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(dim) for dim in self.dims))
        if any(dim < 2 for dim in self.dims):  # noqa: PLR2004
            msg = f"Every subsystem dimension must be at least 2, got {self.dims}"
            raise ValueError(msg)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def tensor(self, other: "HilbertSpace") -> "HilbertSpace":
        return HilbertSpace(self.dims + other.dims)

    @classmethod
    def qubits(cls, count: int) -> "HilbertSpace":
        return cls((QUBIT_DIM,) * count)


@dataclass(frozen=True, eq=False)
class Operator:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.space.total_dim
        if matrix.shape != (dim, dim):
            msg = f"Matrix shape {matrix.shape} does not match space dimension {dim}"
            raise ValueError(msg)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def identity(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.eye(space.total_dim))

    @classmethod
    def zero(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.zeros((space.total_dim, space.total_dim)))

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=tol * max(1.0, self.norm())))

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def commutator(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    def _check_space(self, other: "Operator") -> None:
        if self.space != other.space:
            msg = f"Operator spaces differ: {self.space.dims} vs {other.space.dims}"
            raise ValueError(msg)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix / scalar)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix @ other.matrix)


class QubitOpKind(str, enum.Enum):
    LOWER = "lower"
    RAISE = "raise"
    Z = "z"
    X = "x"
    Y = "y"
    IDENTITY = "identity"


_QUBIT_MATRICES = {
    QubitOpKind.LOWER: [[0, 0], [1, 0]],
    QubitOpKind.RAISE: [[0, 1], [0, 0]],
    QubitOpKind.Z: [[1, 0], [0, -1]],
    QubitOpKind.X: [[0, 1], [1, 0]],
    QubitOpKind.Y: [[0, -1j], [1j, 0]],
    QubitOpKind.IDENTITY: [[1, 0], [0, 1]],
}


@cache
def qubit_op(kind: QubitOpKind | str) -> Operator:
    return Operator(HilbertSpace.qubits(1), np.array(_QUBIT_MATRICES[QubitOpKind(kind)]))


@cache
def bosonic_annihilator(n_max: int) -> Operator:
    if n_max < 2:  # noqa: PLR2004
        msg = f"Invalid Fock truncation {n_max}, need at least 2 levels"
        raise ValueError(msg)
    return Operator(HilbertSpace((n_max,)), np.diag(np.sqrt(np.arange(1, n_max)), k=1))


def _sites_tuple(space: HilbertSpace, site: int | Sequence[int]) -> tuple[int, ...]:
    sites = (site,) if isinstance(site, int | np.integer) else tuple(site)
    if len(set(sites)) != len(sites) or any(not 0 <= s < space.n_sites for s in sites):
        msg = f"Invalid site(s) {sites} for space with {space.n_sites} subsystems"
        raise ValueError(msg)
    return sites


def embed(local_op: Operator, space: HilbertSpace, site: int | Sequence[int]) -> Operator:
    """Lift an operator acting on the given site(s) to the full space."""
    sites = _sites_tuple(space, site)
    local_dims = tuple(space.dims[s] for s in sites)
    if local_op.space.dims != local_dims:
        msg = f"Local operator dims {local_op.space.dims} do not match sites {sites} with dims {local_dims}"
        raise ValueError(msg)

    rest = [s for s in range(space.n_sites) if s not in sites]
    rest_dim = math.prod(space.dims[s] for s in rest)
    full = np.kron(local_op.matrix, np.eye(rest_dim))
    order = list(sites) + rest
    if order == sorted(order):
        return Operator(space, full)

    ordered_dims = [space.dims[s] for s in order]
    axes = list(np.argsort(order))
    n = space.n_sites
    tensor = full.reshape(ordered_dims * 2).transpose(axes + [n + a for a in axes])
    return Operator(space, tensor.reshape(space.total_dim, space.total_dim))


def partial_trace(op: Operator, keep: Sequence[int]) -> Operator:
    space = op.space
    keep = sorted(_sites_tuple(space, keep))
    rest = [s for s in range(space.n_sites) if s not in keep]
    n = space.n_sites
    keep_dim = math.prod(space.dims[s] for s in keep)
    rest_dim = math.prod(space.dims[s] for s in rest)

    tensor = op.matrix.reshape(space.dims * 2).transpose(keep + rest + [n + s for s in keep + rest])
    blocks = tensor.reshape(keep_dim, rest_dim, keep_dim, rest_dim)
    return Operator(HilbertSpace(tuple(space.dims[s] for s in keep)), np.einsum("iaja->ij", blocks))


def hs_coefficient(op: Operator, basis: Operator) -> complex:
    """Hilbert-Schmidt projection coefficient of ``op`` along ``basis``."""
    op._check_space(basis)  # noqa: SLF001
    return complex(np.vdot(basis.matrix, op.matrix) / np.vdot(basis.matrix, basis.matrix))
