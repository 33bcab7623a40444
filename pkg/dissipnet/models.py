"""Two-qubit driven-dissipative entanglement models.

Three architectures share one reduced form: both qubits decay into a common
field, directly (one cavity), through a unidirectional lossy channel
(cascaded) or through a lossy channel in both directions (bidirectional).

Intrinsic loss entries ``gamma_r*`` and ``gamma_phi*`` are operator
amplitudes, so the corresponding rates are their squares.
"""

import enum
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from dissipnet.lindblad import DensityMatrix, LindbladModel, Schedule, liouvillian, steady_state
from dissipnet.log import logger
from dissipnet.metrics import concurrence
from dissipnet.operators import HilbertSpace, Operator, QubitOpKind, bosonic_annihilator, embed, qubit_op
from dissipnet.slh import (
    DispersiveCoupling,
    adiabatic_eliminate,
    bidirectional_network,
    cascaded_network,
    cavity,
    eliminate_loops,
)

TWO_QUBITS = HilbertSpace.qubits(2)
FOCK_START = 3
FOCK_CAP = {"single_cavity": 6, "cascaded": 4, "bidirectional": 4}
FOCK_TOL = 1e-3
LOW_LOSS_LIMIT = 0.5
SCHEDULE_SETTLE = 1e-6
DEPHASING_WEIGHT = 2.0


class Architecture(str, enum.Enum):
    SINGLE_CAVITY = "single_cavity"
    CASCADED = "cascaded"
    BIDIRECTIONAL = "bidirectional"

    @property
    def is_remote(self) -> bool:
        return self is not Architecture.SINGLE_CAVITY


class Regime(str, enum.Enum):
    SINGLE_FIRST_ORDER = "single_first_order"
    CASCADED_LOW_LOSS = "cascaded_low_loss"
    CASCADED_HIGH_LOSS = "cascaded_high_loss"
    BIDIR_LOW_LOSS = "bidir_low_loss"
    BIDIR_HIGH_LOSS = "bidir_high_loss"

    @property
    def architecture(self) -> Architecture:
        if self is Regime.SINGLE_FIRST_ORDER:
            return Architecture.SINGLE_CAVITY
        if self.value.startswith("cascaded"):
            return Architecture.CASCADED
        return Architecture.BIDIRECTIONAL


class IntrinsicLoss(str, enum.Enum):
    RELAXATION = "relaxation"
    DEPHASING = "dephasing"


@dataclass(frozen=True)
class PairParams:
    alpha1: complex = 1.0
    alpha2: complex = 1.0
    delta1: float = 0.0
    delta2: float = 0.0
    s1: complex = 1.0
    s2: complex = 1.0
    gamma_r1: float = 0.0
    gamma_r2: float = 0.0
    gamma_phi1: float = 0.0
    gamma_phi2: float = 0.0
    eta_mag: float = 1.0
    phi: float = 0.0
    architecture: Architecture = Architecture.SINGLE_CAVITY

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        if not 0 <= self.eta_mag <= 1:
            msg = f"Channel efficiency must lie in [0, 1], got {self.eta_mag}"
            raise ValueError(msg)
        for name in ("gamma_r1", "gamma_r2", "gamma_phi1", "gamma_phi2"):
            if getattr(self, name) < 0:
                msg = f"Intrinsic loss amplitude {name} must be non-negative, got {getattr(self, name)}"
                raise ValueError(msg)

    @property
    def loss(self) -> float:
        return math.sqrt(max(0.0, 1 - self.eta_mag**2))

    @property
    def eta(self) -> complex:
        return self.eta_mag * np.exp(1j * self.phi)

    def replace(self, **changes) -> "PairParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {field.name: getattr(self, field.name) for field in fields(self)}


@dataclass(frozen=True)
class CavityParams:
    """Qubit-cavity couplings and cavity parameters on top of the drive settings.

    The single-cavity architecture uses ``kappa1`` and ``cav_delta1`` for the
    shared mode.
    """

    g1: float
    g2: float
    kappa1: float
    kappa2: float
    cav_delta1: float = 0.0
    cav_delta2: float = 0.0
    drive: PairParams = PairParams()

    def __post_init__(self):
        if self.kappa1 <= 0 or self.kappa2 <= 0:
            msg = f"Cavity decay rates must be positive, got {self.kappa1}, {self.kappa2}"
            raise ValueError(msg)

    def couplings(self, architecture: Architecture) -> tuple[DispersiveCoupling, DispersiveCoupling]:
        drive = self.drive
        if Architecture(architecture).is_remote:
            return (
                DispersiveCoupling(self.g1, self.kappa1, self.cav_delta1, drive.delta1),
                DispersiveCoupling(self.g2, self.kappa2, self.cav_delta2, drive.delta2),
            )
        return (
            DispersiveCoupling(self.g1, self.kappa1, self.cav_delta1, drive.delta1),
            DispersiveCoupling(self.g2, self.kappa1, self.cav_delta1, drive.delta2),
        )

    def reduced_params(self, architecture: Architecture) -> PairParams:
        """Drive settings with the decay amplitudes implied by adiabatic elimination."""
        first, second = self.couplings(architecture)
        return self.drive.replace(
            s1=first.decay_amplitude, s2=second.decay_amplitude, architecture=Architecture(architecture)
        )


def _qubit_ops(space: HilbertSpace, site: int) -> tuple[Operator, Operator, Operator]:
    lowering = embed(qubit_op(QubitOpKind.LOWER), space, site)
    return lowering, lowering.dag(), embed(qubit_op(QubitOpKind.Z), space, site)


def _drive_hamiltonian(space: HilbertSpace, site: int, alpha: complex, delta: float) -> Operator:
    lowering, raising, _ = _qubit_ops(space, site)
    return alpha * raising + np.conj(alpha) * lowering + delta * (raising @ lowering)


def _intrinsic_ops(params: PairParams, space: HilbertSpace) -> list[Operator]:
    ops = []
    for site, relaxation, dephasing in (
        (0, params.gamma_r1, params.gamma_phi1),
        (1, params.gamma_r2, params.gamma_phi2),
    ):
        lowering, _, z = _qubit_ops(space, site)
        if relaxation:
            ops.append(relaxation * lowering)
        if dephasing:
            ops.append(dephasing * z)
    return ops


def build_reduced(params: PairParams) -> LindbladModel:
    space = TWO_QUBITS
    sm1, sp1, _ = _qubit_ops(space, 0)
    sm2, _, _ = _qubit_ops(space, 1)
    hamiltonian = _drive_hamiltonian(space, 0, params.alpha1, params.delta1) + _drive_hamiltonian(
        space, 1, params.alpha2, params.delta2
    )
    s1, s2, eta = params.s1, params.s2, params.eta

    match params.architecture:
        case Architecture.SINGLE_CAVITY:
            collapse = [s1 * sm1 + s2 * sm2]
        case Architecture.CASCADED:
            collapse = [eta * s1 * sm1 + s2 * sm2, params.loss * s1 * sm1]
            exchange = 0.5j * np.conj(eta * s1) * s2 * (sp1 @ sm2)
            hamiltonian = hamiltonian + exchange + exchange.dag()
        case Architecture.BIDIRECTIONAL:
            norm = math.sqrt(1 + params.eta_mag**2)
            collapse = [(eta * s1 * sm1 + s2 * sm2) / norm, (s1 * sm1 + eta * s2 * sm2) / norm]

    return LindbladModel(hamiltonian, (*collapse, *_intrinsic_ops(params, space)))


def _full_space(architecture: Architecture, n_max: int) -> HilbertSpace:
    if architecture.is_remote:
        return HilbertSpace((2, 2, n_max, n_max))
    return HilbertSpace((2, 2, n_max))


def build_full(params: CavityParams, architecture: Architecture, n_max: int) -> LindbladModel:
    """Qubits plus explicit cavity modes, composed through the SLH network for remote links."""
    architecture = Architecture(architecture)
    drive = params.drive
    space = _full_space(architecture, n_max)
    local = bosonic_annihilator(n_max)
    intrinsic = _intrinsic_ops(drive, space)

    def jaynes_cummings(site: int, mode: Operator, g: float) -> Operator:
        lowering, raising, _ = _qubit_ops(space, site)
        return g * (raising @ mode + lowering @ mode.dag())

    drives = [
        _drive_hamiltonian(space, 0, drive.alpha1, drive.delta1),
        _drive_hamiltonian(space, 1, drive.alpha2, drive.delta2),
    ]

    if architecture is Architecture.SINGLE_CAVITY:
        mode = embed(local, space, 2)
        hamiltonian = (
            drives[0]
            + drives[1]
            + params.cav_delta1 * (mode.dag() @ mode)
            + jaynes_cummings(0, mode, params.g1)
            + jaynes_cummings(1, mode, params.g2)
        )
        return cavity(mode, params.kappa1, hamiltonian).to_model(intrinsic)

    modes = [embed(local, space, 2), embed(local, space, 3)]
    reflection = -1.0 if architecture is Architecture.CASCADED else 1.0
    components = [
        cavity(
            mode,
            kappa,
            drives[site] + cav_delta * (mode.dag() @ mode) + jaynes_cummings(site, mode, g),
            reflection=reflection,
        )
        for site, (mode, kappa, cav_delta, g) in enumerate(
            zip(
                modes,
                (params.kappa1, params.kappa2),
                (params.cav_delta1, params.cav_delta2),
                (params.g1, params.g2),
            )
        )
    ]
    if architecture is Architecture.CASCADED:
        network = cascaded_network(components[0], components[1], drive.eta)
    else:
        network = eliminate_loops(bidirectional_network(components[0], components[1], drive.eta))
    return network.to_model(intrinsic)


def eliminated(params: CavityParams, architecture: Architecture, n_max: int) -> LindbladModel:
    """Reduced model obtained by eliminating the cavities of the full model."""
    full = build_full(params, architecture, n_max)
    _, reduced = adiabatic_eliminate(full, params.couplings(Architecture(architecture)))
    return reduced


@dataclass(frozen=True)
class FullSolution:
    n_max: int
    qubits: DensityMatrix
    concurrence: float


def solve_full(params: CavityParams, architecture: Architecture, n_cap: int | None = None) -> FullSolution:
    """Steady state of the full model, growing the Fock truncation until concurrence settles."""
    architecture = Architecture(architecture)
    cap = n_cap if n_cap is not None else FOCK_CAP[architecture.value]
    previous = None
    for n_max in range(FOCK_START, cap + 1):
        rho = steady_state(liouvillian(build_full(params, architecture, n_max))).reduced([0, 1])
        value = concurrence(rho)
        logger.debug(f"Full {architecture.value} model at n_max={n_max}: concurrence {value:.6f}")
        if previous is not None and abs(value - previous.concurrence) < FOCK_TOL:
            return FullSolution(n_max, rho, value)
        previous = FullSolution(n_max, rho, value)
    logger.warning(f"Fock truncation reached cap n_max={cap} without settling below {FOCK_TOL}")
    return previous


def steady_concurrence(params: PairParams) -> float:
    return concurrence(steady_state(liouvillian(build_reduced(params))))


def analytic_steady_state(delta: float, alpha: complex) -> tuple[np.ndarray, float]:
    """Dark state of the symmetric single-cavity model with delta1 = -delta2 = delta.

    Components in the (up up, up down, down up, down down) basis.
    """
    if delta == 0 and alpha == 0:
        msg = "Dark state undefined for delta = alpha = 0"
        raise ValueError(msg)
    psi = np.array([0, alpha, -alpha, -delta], dtype=complex)
    psi /= np.linalg.norm(psi)
    weight = 2 * abs(alpha) ** 2
    return psi, weight / (delta**2 + weight)


def first_order_detuning(
    l: float,  # noqa: E741
    intrinsic: IntrinsicLoss | str = IntrinsicLoss.RELAXATION,
    alpha: float = 1.0,
    s: float = 2.0,
) -> float:
    """Detuning-to-drive ratio of the symmetric single-cavity model that minimizes first-order infidelity.

    With x = (delta/alpha)^2 the infidelity is x/(2 + x) + f (l s)^2/(k x). The first term is the
    ground-state weight of the dark state, the second the bright population fed by the intrinsic
    loss (f = 1 for relaxation, 2 for dephasing) and emptied at the return rate
    k = 4 s^2 alpha^2/(s^4 + 4 alpha^2).
    """
    if not 0 <= l <= 1:
        msg = f"Loss must lie in [0, 1], got {l}"
        raise ValueError(msg)
    if alpha <= 0 or s <= 0:
        msg = f"Drive and decay must be positive, got alpha={alpha}, s={s}"
        raise ValueError(msg)
    weight = DEPHASING_WEIGHT if IntrinsicLoss(intrinsic) is IntrinsicLoss.DEPHASING else 1.0
    return_rate = 4 * s**2 * alpha**2 / (s**4 + 4 * alpha**2)
    c = l * s * math.sqrt(weight / (2 * return_rate))
    if c >= 1:
        msg = f"Loss {l} is beyond the first-order regime of the single-cavity model"
        raise ValueError(msg)
    return math.sqrt(2 * c / (1 - c))


def single_cavity_params(
    ratio: float,
    l: float,  # noqa: E741
    intrinsic: IntrinsicLoss | str = IntrinsicLoss.RELAXATION,
    alpha: float = 1.0,
    s: float = 2.0,
) -> PairParams:
    """Symmetric single-cavity pair with delta1 = -delta2 = ratio * alpha and loss l on qubit 1."""
    detuning = ratio * alpha
    params = PairParams(alpha1=alpha, alpha2=alpha, delta1=detuning, delta2=-detuning, s1=s, s2=s)
    if IntrinsicLoss(intrinsic) is IntrinsicLoss.DEPHASING:
        return params.replace(gamma_phi1=l * s)
    return params.replace(gamma_r1=l * s)


def asymmetric_dark_params(s1: float, s2: float, alpha1: float, ratio: float) -> PairParams:
    """Single-cavity drives that keep a pure dark state for unequal real decays s1, s2.

    With r = s1/s2 the drives are alpha2 = r alpha1 and delta1,2 = shift +- ratio*alpha1, where
    the common shift is -alpha1 (1 - r^2)/ratio. The dark state has concurrence
    2r/(ratio^2 + 1 + r^2), so ratio trades entanglement against a large common shift.
    """
    if s1 <= 0 or s2 <= 0 or alpha1 <= 0:
        msg = f"Decays and drive must be positive, got s1={s1}, s2={s2}, alpha1={alpha1}"
        raise ValueError(msg)
    r = s1 / s2
    if ratio <= 0 and r != 1:
        msg = f"Unequal decays need a positive detuning ratio, got {ratio}"
        raise ValueError(msg)
    half_splitting = ratio * alpha1
    shift = -alpha1 * (1 - r**2) / ratio if r != 1 else 0.0
    return PairParams(
        alpha1=alpha1,
        alpha2=r * alpha1,
        delta1=shift + half_splitting,
        delta2=shift - half_splitting,
        s1=s1,
        s2=s2,
    )


def analytic_solution(
    regime: Regime | str, l: float, intrinsic: IntrinsicLoss | str = IntrinsicLoss.RELAXATION  # noqa: E741
) -> PairParams:
    """Closed-form parameter recipe for the given loss regime, in units of the reference rate."""
    regime = Regime(regime)
    if not 0 <= l <= 1:
        msg = f"Loss must lie in [0, 1], got {l}"
        raise ValueError(msg)
    eta = math.sqrt(1 - l**2)
    if regime.value.endswith("low_loss") and l > LOW_LOSS_LIMIT:
        logger.warning(f"Recipe {regime.value} used at loss {l:.3f} outside its low-loss regime")
    if regime.value.endswith("high_loss") and eta > LOW_LOSS_LIMIT:
        logger.warning(f"Recipe {regime.value} used at efficiency {eta:.3f} outside its high-loss regime")

    match regime:
        case Regime.SINGLE_FIRST_ORDER:
            return single_cavity_params(math.sqrt(l / 2), l, intrinsic)
        case Regime.CASCADED_LOW_LOSS:
            s2 = 0.2 + 2 * math.sqrt(l) + l
            return PairParams(s1=s2 + 8 * l**2, s2=s2, eta_mag=eta, architecture=Architecture.CASCADED)
        case Regime.CASCADED_HIGH_LOSS:
            return PairParams(
                alpha1=0.75,
                alpha2=0.25 - eta,
                s1=1.0,
                s2=5 - 2 * math.sqrt(eta),
                eta_mag=eta,
                architecture=Architecture.CASCADED,
            )
        case Regime.BIDIR_LOW_LOSS:
            return PairParams(
                alpha1=1.7,
                alpha2=-1.7,
                delta1=l,
                delta2=-l,
                eta_mag=eta,
                phi=math.pi,
                architecture=Architecture.BIDIRECTIONAL,
            )
        case Regime.BIDIR_HIGH_LOSS:
            return PairParams(
                alpha1=1 - math.sqrt(eta),
                alpha2=0.0,
                s1=1.0,
                s2=1.7,
                eta_mag=eta,
                phi=math.pi,
                architecture=Architecture.BIDIRECTIONAL,
            )


def regimes_for(architecture: Architecture) -> tuple[Regime, Regime]:
    """Low-loss and high-loss recipes of a remote architecture."""
    if Architecture(architecture) is Architecture.CASCADED:
        return Regime.CASCADED_LOW_LOSS, Regime.CASCADED_HIGH_LOSS
    if Architecture(architecture) is Architecture.BIDIRECTIONAL:
        return Regime.BIDIR_LOW_LOSS, Regime.BIDIR_HIGH_LOSS
    msg = "Only remote architectures have low and high-loss recipes"
    raise ValueError(msg)


def apply_loss(params: PairParams, l: float) -> PairParams:  # noqa: E741
    """Tie the loss variable to the architecture's loss mechanism.

    One cavity: intrinsic relaxation of the first qubit with amplitude l*|s1|.
    Remote: channel efficiency sqrt(1 - l^2).
    """
    if not 0 <= l <= 1:
        msg = f"Loss must lie in [0, 1], got {l}"
        raise ValueError(msg)
    if params.architecture.is_remote:
        return params.replace(eta_mag=math.sqrt(1 - l**2))
    return params.replace(gamma_r1=l * abs(params.s1))


def detuning_schedule(params: PairParams, l: float, step: float) -> Schedule:  # noqa: E741
    """Exponentially decaying detuning toward its optimum alpha*sqrt(l/2).

    delta1(t) = -delta2(t) = alpha (sqrt(l/2) + exp(-alpha sqrt(l/2) t)), held
    constant on each step.
    """
    alpha = abs(params.alpha1)
    rate = alpha * math.sqrt(l / 2)
    if rate <= 0:
        msg = "Detuning schedule needs a positive drive and loss"
        raise ValueError(msg)

    def model_at(t: float) -> LindbladModel:
        detuning = rate + alpha * math.exp(-rate * t)
        return build_reduced(params.replace(delta1=detuning, delta2=-detuning))

    final = build_reduced(params.replace(delta1=rate, delta2=-rate))
    settle = math.log(1 / SCHEDULE_SETTLE) / rate
    return Schedule(model_at=model_at, final=final, step=step, settle_time=settle)


def distance_to_efficiency(distance: float, attenuation: float) -> float:
    """Field efficiency of a link with ``attenuation`` dB per unit length."""
    if distance < 0 or attenuation < 0:
        msg = f"Distance and attenuation must be non-negative, got {distance}, {attenuation}"
        raise ValueError(msg)
    return math.sqrt(10 ** (-attenuation * distance / 10))


def efficiency_to_loss(eta: float) -> float:
    if not 0 <= eta <= 1:
        msg = f"Efficiency must lie in [0, 1], got {eta}"
        raise ValueError(msg)
    return math.sqrt(1 - eta**2)
