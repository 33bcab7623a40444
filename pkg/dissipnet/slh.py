"""SLH network algebra with complex scalar scattering matrices.

A triplet (S, L, H) describes a component with ``n_ports`` field channels:
output fields b_out = S b_in + L. Loops are closed in the zero time delay
(Markovian) limit.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from dissipnet.errors import EliminationInvalidError, IllConditionedNetworkError
from dissipnet.lindblad import LindbladModel
from dissipnet.log import logger
from dissipnet.operators import (
    HilbertSpace,
    Operator,
    QubitOpKind,
    bosonic_annihilator,
    embed,
    hs_coefficient,
    partial_trace,
    qubit_op,
)

UNITARITY_TOL = 1e-10
MAX_CONDITION = 1e8
VALIDITY_WARN_RATIO = 0.3


def im(op: Operator) -> Operator:
    """Hermitian imaginary part (X - X^+) / 2i."""
    return (op - op.dag()) / 2j


def _combine(coefficients: Sequence[complex], ops: Sequence[Operator], space: HilbertSpace) -> Operator:
    total = Operator.zero(space)
    for coefficient, op in zip(coefficients, ops, strict=True):
        if coefficient != 0:
            total = total + coefficient * op
    return total


@dataclass(frozen=True, eq=False)
class SlhTriplet:
    space: HilbertSpace
    S: np.ndarray
    L: tuple[Operator, ...]
    H: Operator

    def __post_init__(self):
        scattering = np.array(self.S, dtype=complex).reshape(len(self.L), len(self.L))
        scattering.setflags(write=False)
        object.__setattr__(self, "S", scattering)
        object.__setattr__(self, "L", tuple(self.L))
        if any(op.space != self.space for op in (*self.L, self.H)):
            msg = "All L entries and H must act on the triplet's space"
            raise ValueError(msg)
        if not self.H.is_hermitian():
            msg = "Triplet Hamiltonian is not Hermitian"
            raise ValueError(msg)
        if self.n_ports and np.linalg.eigvalsh(np.eye(self.n_ports) - scattering.conj().T @ scattering).min() < (
            -UNITARITY_TOL
        ):
            msg = "Scattering matrix is not a contraction"
            raise ValueError(msg)

    @property
    def n_ports(self) -> int:
        return len(self.L)

    @property
    def is_lossless(self) -> bool:
        identity = np.eye(self.n_ports)
        return bool(np.linalg.norm(self.S.conj().T @ self.S - identity) <= UNITARITY_TOL)

    @classmethod
    def trivial(cls, space: HilbertSpace, n_ports: int) -> "SlhTriplet":
        zero = Operator.zero(space)
        return cls(space, np.eye(n_ports), (zero,) * n_ports, zero)

    def to_model(self, extra_collapse_ops: Sequence[Operator] = ()) -> LindbladModel:
        return LindbladModel(self.H, (*self.L, *extra_collapse_ops))


def concatenate(first: SlhTriplet, second: SlhTriplet) -> SlhTriplet:
    if first.space != second.space:
        msg = f"Cannot concatenate triplets on {first.space.dims} and {second.space.dims}"
        raise ValueError(msg)
    n1, n2 = first.n_ports, second.n_ports
    scattering = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    scattering[:n1, :n1] = first.S
    scattering[n1:, n1:] = second.S
    return SlhTriplet(first.space, scattering, first.L + second.L, first.H + second.H)


def series(downstream: SlhTriplet, upstream: SlhTriplet) -> SlhTriplet:
    """Feed every output of ``upstream`` into the matching input of ``downstream``."""
    if downstream.n_ports != upstream.n_ports:
        msg = f"Port mismatch in series product: {downstream.n_ports} vs {upstream.n_ports}"
        raise ValueError(msg)
    if downstream.space != upstream.space:
        msg = "Series product needs triplets on the same space"
        raise ValueError(msg)

    space = downstream.space
    scattered = [_combine(row, upstream.L, space) for row in downstream.S]
    couplings = tuple(l_d + l_u for l_d, l_u in zip(downstream.L, scattered, strict=True))
    exchange = _combine([1] * len(scattered), [l_d.dag() @ l_u for l_d, l_u in zip(downstream.L, scattered)], space)
    hamiltonian = downstream.H + upstream.H + im(exchange)
    return SlhTriplet(space, downstream.S @ upstream.S, couplings, hamiltonian)


def beam_splitter(eta: complex, space: HilbertSpace) -> SlhTriplet:
    """Lossy channel: transmission amplitude eta, remainder routed to a loss port."""
    magnitude = abs(eta)
    if magnitude > 1 + 1e-12:
        msg = f"Channel efficiency |eta| = {magnitude} exceeds 1"
        raise ValueError(msg)
    magnitude = min(magnitude, 1.0)
    phase = np.exp(1j * np.angle(eta))
    swap = np.array([[0, 1], [1, 0]])
    scattering = phase * (magnitude * np.eye(2) + 1j * math.sqrt(1 - magnitude**2) * swap)
    zero = Operator.zero(space)
    return SlhTriplet(space, scattering, (zero, zero), zero)


def cavity(mode: Operator, kappa: float, hamiltonian: Operator, reflection: complex = -1.0) -> SlhTriplet:
    """Single-port leaky cavity with field coupling sqrt(kappa) a."""
    return SlhTriplet(mode.space, np.array([[reflection]]), (math.sqrt(kappa) * mode,), hamiltonian)


def cascaded_network(first: SlhTriplet, second: SlhTriplet, eta: complex) -> SlhTriplet:
    """Unidirectional link: output of ``first`` reaches ``second`` through a lossy channel."""
    space = first.space
    padding = SlhTriplet.trivial(space, 1)
    upstream = series(beam_splitter(eta, space), concatenate(first, padding))
    return series(concatenate(second, padding), upstream)


@dataclass(frozen=True, eq=False)
class NetworkGraph:
    """Concatenated components with internal output-to-input connections.

    Port indices refer to the concatenation of ``components`` in order.
    ``connections`` holds (output port, input port) pairs. External ports are
    listed in the order they appear in the reduced triplet. After loop
    elimination the couplings are scaled by ``normalization`` and the loop
    Hamiltonian by its squared modulus.
    """

    components: tuple[SlhTriplet, ...]
    connections: tuple[tuple[int, int], ...]
    external_inputs: tuple[int, ...]
    external_outputs: tuple[int, ...]
    normalization: complex = 1.0

    def __post_init__(self):
        n_ports = self.combined.n_ports
        outputs = sorted(out for out, _ in self.connections)
        inputs = sorted(inp for _, inp in self.connections)
        if len(set(outputs)) != len(outputs) or len(set(inputs)) != len(inputs):
            msg = "Every port may carry at most one internal connection"
            raise ValueError(msg)
        if sorted((*outputs, *self.external_outputs)) != list(range(n_ports)) or sorted(
            (*inputs, *self.external_inputs)
        ) != list(range(n_ports)):
            msg = "Internal and external ports must partition all ports"
            raise ValueError(msg)

    @cached_property
    def combined(self) -> SlhTriplet:
        return reduce(concatenate, self.components)

    @cached_property
    def internal_outputs(self) -> list[int]:
        return sorted(out for out, _ in self.connections)

    @cached_property
    def internal_inputs(self) -> list[int]:
        return sorted(inp for _, inp in self.connections)

    @cached_property
    def A(self) -> np.ndarray:  # noqa: N802
        adjacency = np.zeros((len(self.connections), len(self.connections)))
        for out, inp in self.connections:
            adjacency[self.internal_inputs.index(inp), self.internal_outputs.index(out)] = 1
        return adjacency

    def _block(self, outputs: Sequence[int], inputs: Sequence[int]) -> np.ndarray:
        return self.combined.S[np.ix_(outputs, inputs)]

    @property
    def S_ii(self) -> np.ndarray:  # noqa: N802
        return self._block(self.internal_outputs, self.internal_inputs)

    @property
    def S_ie(self) -> np.ndarray:  # noqa: N802
        return self._block(self.internal_outputs, self.external_inputs)

    @property
    def S_ei(self) -> np.ndarray:  # noqa: N802
        return self._block(self.external_outputs, self.internal_inputs)

    @property
    def S_ee(self) -> np.ndarray:  # noqa: N802
        return self._block(self.external_outputs, self.external_inputs)

    @property
    def L_int(self) -> list[Operator]:  # noqa: N802
        return [self.combined.L[out] for out in self.internal_outputs]

    @property
    def L_ext(self) -> list[Operator]:  # noqa: N802
        return [self.combined.L[out] for out in self.external_outputs]


def eliminate_loops(net: NetworkGraph) -> SlhTriplet:
    """Close all internal connections (linear fractional transformation)."""
    space = net.combined.space
    loop = np.eye(len(net.connections)) - net.S_ii @ net.A
    condition = float(np.linalg.cond(loop))
    logger.debug(f"Loop elimination condition number {condition:.3e}")
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise IllConditionedNetworkError(condition)

    resolvent = np.linalg.inv(loop)
    internal = [_combine(row, net.L_int, space) for row in resolvent]
    fed_back = [_combine(row, internal, space) for row in net.A]
    to_external = [_combine(row, fed_back, space) for row in net.S_ei]
    to_internal = [_combine(row, fed_back, space) for row in net.S_ii]

    scattering = net.S_ee + net.S_ei @ net.A @ resolvent @ net.S_ie
    couplings = tuple(
        net.normalization * (l_e + extra) for l_e, extra in zip(net.L_ext, to_external, strict=True)
    )
    loop_terms = [l.dag() @ x for l, x in zip(net.L_ext, to_external)] + [
        l.dag() @ x for l, x in zip(net.L_int, to_internal)
    ]
    correction = im(_combine([1] * len(loop_terms), loop_terms, space))
    hamiltonian = net.combined.H + abs(net.normalization) ** 2 * correction
    return SlhTriplet(space, scattering, couplings, hamiltonian)


def bidirectional_network(first: SlhTriplet, second: SlhTriplet, eta: complex) -> NetworkGraph:
    """Two single-port cavities exchanging fields both ways through lossy channels.

    Ports: 0 first cavity, 1 second cavity, 2/3 forward channel (transmit/loss),
    4/5 backward channel. The reduced outputs are (backward loss, forward loss),
    normalized so each cavity's summed decay weight is its kappa.
    """
    space = first.space
    magnitude = abs(eta)
    loss = math.sqrt(max(0.0, 1 - magnitude**2))
    if loss == 0:
        raise IllConditionedNetworkError(math.inf)
    normalization = (1 - eta**2) / (1j * np.exp(1j * np.angle(eta)) * loss * math.sqrt(1 + magnitude**2))
    return NetworkGraph(
        components=(first, second, beam_splitter(eta, space), beam_splitter(eta, space)),
        connections=((0, 2), (2, 1), (1, 4), (4, 0)),
        external_inputs=(5, 3),
        external_outputs=(5, 3),
        normalization=complex(normalization),
    )


@dataclass(frozen=True)
class DispersiveCoupling:
    """Qubit-cavity coupling g, cavity decay kappa, cavity and qubit detunings."""

    g: float
    kappa: float
    cav_delta: float
    qubit_delta: float

    @property
    def complex_detuning(self) -> complex:
        return self.qubit_delta - self.cav_delta + 0.5j * self.kappa

    @property
    def validity_ratio(self) -> float:
        return abs(self.g) / abs(self.complex_detuning)

    @property
    def decay_amplitude(self) -> complex:
        return math.sqrt(self.kappa) * self.g / self.complex_detuning


def _cavity_sites(space: HilbertSpace) -> list[int]:
    """Cavity site of each qubit: one shared cavity or one cavity per qubit."""
    if space.n_sites == 3:  # noqa: PLR2004
        return [2, 2]
    if space.n_sites == 4:  # noqa: PLR2004
        return [2, 3]
    msg = f"Expected qubit, qubit, cavity(, cavity) structure, got dims {space.dims}"
    raise ValueError(msg)


def adiabatic_eliminate(
    full: LindbladModel, couplings: Sequence[DispersiveCoupling]
) -> tuple[tuple[complex, ...], LindbladModel]:
    """Replace each cavity mode by the qubit lowering operators it follows.

    a_c -> sum over qubits j in cavity c of (s_j / sqrt(kappa_j)) sigma_j^-.
    Cavity number terms are absorbed in the cavity detuning and dropped.
    """
    space = full.space
    sites = _cavity_sites(space)
    qubits = HilbertSpace.qubits(2)
    cavity_dim = space.total_dim // qubits.total_dim

    amplitudes = []
    for index, coupling in enumerate(couplings):
        ratio = coupling.validity_ratio
        if ratio >= 1:
            raise EliminationInvalidError(ratio)
        if ratio > VALIDITY_WARN_RATIO:
            logger.warning(f"Dispersive ratio {ratio:.3f} for qubit {index + 1} is large, elimination is rough")
        amplitudes.append(coupling.decay_amplitude)

    modes = {}
    followers = {}
    for index, site in enumerate(sites):
        modes[site] = embed(bosonic_annihilator(space.dims[site]), space, site)
        lowering = embed(qubit_op(QubitOpKind.LOWER), qubits, index)
        follower = amplitudes[index] / math.sqrt(couplings[index].kappa) * lowering
        followers[site] = followers[site] + follower if site in followers else follower

    def qubit_part(op: Operator) -> Operator:
        return partial_trace(op, [0, 1]) / cavity_dim

    def reduce_coupling(op: Operator) -> Operator:
        reduced = qubit_part(op)
        for site, mode in modes.items():
            reduced = reduced + hs_coefficient(op, mode) * followers[site]
        return reduced

    hamiltonian = qubit_part(full.hamiltonian)
    for site, mode in modes.items():
        for other, other_mode in modes.items():
            if site != other:
                weight = hs_coefficient(full.hamiltonian, mode.dag() @ other_mode)
                hamiltonian = hamiltonian + weight * (followers[site].dag() @ followers[other])
    hamiltonian = 0.5 * (hamiltonian + hamiltonian.dag())

    reduced = LindbladModel(hamiltonian, tuple(reduce_coupling(op) for op in full.collapse_ops))
    return tuple(amplitudes), reduced
