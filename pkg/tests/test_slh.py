import math

import numpy as np
import pytest

from dissipnet.errors import EliminationInvalidError, IllConditionedNetworkError
from dissipnet.lindblad import LindbladModel, heisenberg_drift
from dissipnet.operators import HilbertSpace, Operator, bosonic_annihilator, embed, hs_coefficient
from dissipnet.slh import (
    DispersiveCoupling,
    NetworkGraph,
    SlhTriplet,
    adiabatic_eliminate,
    beam_splitter,
    bidirectional_network,
    cascaded_network,
    cavity,
    concatenate,
    eliminate_loops,
    im,
    series,
)

MODES = HilbertSpace((3, 3))
A1 = embed(bosonic_annihilator(3), MODES, 0)
A2 = embed(bosonic_annihilator(3), MODES, 1)
ZERO = Operator.zero(MODES)


def random_triplet(rng: np.random.Generator, n_ports: int = 2) -> SlhTriplet:
    space = HilbertSpace.qubits(1)
    unitary, _ = np.linalg.qr(rng.normal(size=(n_ports, n_ports)) + 1j * rng.normal(size=(n_ports, n_ports)))
    couplings = [Operator(space, rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) for _ in range(n_ports)]
    raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return SlhTriplet(space, unitary, couplings, Operator(space, raw + raw.conj().T))


def assert_triplets_close(first: SlhTriplet, second: SlhTriplet, atol: float = 1e-10) -> None:
    np.testing.assert_allclose(first.S, second.S, atol=atol)
    for l_first, l_second in zip(first.L, second.L, strict=True):
        np.testing.assert_allclose(l_first.matrix, l_second.matrix, atol=atol)
    np.testing.assert_allclose(first.H.matrix, second.H.matrix, atol=atol)


def two_cavities(kappa1: float, kappa2: float, reflection: complex = -1.0, detunings=(0.0, 0.0)):
    return (
        cavity(A1, kappa1, detunings[0] * (A1.dag() @ A1), reflection=reflection),
        cavity(A2, kappa2, detunings[1] * (A2.dag() @ A2), reflection=reflection),
    )


def test_im__is_hermitian_part_of_minus_i_times_operator() -> None:
    op = 2j * (A1.dag() @ A2)
    assert im(op).is_hermitian()
    np.testing.assert_allclose(im(op).matrix, (A1.dag() @ A2 + A2.dag() @ A1).matrix)


def test_slh_triplet__scattering_not_contraction__raise_value_error() -> None:
    with pytest.raises(ValueError):
        SlhTriplet(MODES, [[2.0]], (A1,), ZERO)


def test_slh_triplet__non_hermitian_hamiltonian__raise_value_error() -> None:
    with pytest.raises(ValueError):
        SlhTriplet(MODES, [[1.0]], (A1,), A1)


def test_concatenate__zero_port_triplet__identity() -> None:
    triplet = random_triplet(np.random.default_rng(1))
    empty = SlhTriplet.trivial(triplet.space, 0)
    assert_triplets_close(concatenate(triplet, empty), triplet)
    assert_triplets_close(concatenate(empty, triplet), triplet)


def test_concatenate__scattering_is_block_diagonal() -> None:
    rng = np.random.default_rng(2)
    first, second = random_triplet(rng, 1), random_triplet(rng, 2)
    joined = concatenate(first, second)
    expected = 3
    assert joined.n_ports == expected
    np.testing.assert_allclose(joined.S[:1, 1:], 0)
    np.testing.assert_allclose(joined.S[1:, 1:], second.S)


def test_series__identity_on_either_side__unchanged() -> None:
    triplet = random_triplet(np.random.default_rng(3))
    identity = SlhTriplet.trivial(triplet.space, 2)
    assert_triplets_close(series(identity, triplet), triplet)
    assert_triplets_close(series(triplet, identity), triplet)


def test_series__random_triplets__associative() -> None:
    rng = np.random.default_rng(4)
    for _ in range(5):
        first, second, third = (random_triplet(rng) for _ in range(3))
        assert_triplets_close(series(series(third, second), first), series(third, series(second, first)))


def test_series__port_mismatch__raise_value_error() -> None:
    rng = np.random.default_rng(5)
    with pytest.raises(ValueError):
        series(random_triplet(rng, 1), random_triplet(rng, 2))


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.8j, 0.5 * np.exp(2.1j), 1.0])
def test_beam_splitter__any_efficiency__lossless(eta: complex) -> None:
    assert beam_splitter(eta, MODES).is_lossless


def test_beam_splitter__limits() -> None:
    np.testing.assert_allclose(beam_splitter(1.0, MODES).S, np.eye(2))
    np.testing.assert_allclose(beam_splitter(0.0, MODES).S, [[0, 1j], [1j, 0]])


def test_beam_splitter__efficiency_above_one__raise_value_error() -> None:
    with pytest.raises(ValueError):
        beam_splitter(1.5, MODES)


def test_cascaded_network__random_channels__matches_closed_form() -> None:
    rng = np.random.default_rng(6)
    for _ in range(5):
        eta = rng.uniform(0.05, 0.95) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        kappa1, kappa2 = rng.uniform(0.2, 3.0, size=2)
        loss = math.sqrt(1 - abs(eta) ** 2)
        c1, c2 = math.sqrt(kappa1) * A1, math.sqrt(kappa2) * A2

        network = cascaded_network(*two_cavities(kappa1, kappa2), eta)

        expected_l = (c2 - eta * c1, 1j * np.exp(1j * np.angle(eta)) * loss * c1)
        expected_h = (-eta * (c2.dag() @ c1) + np.conj(eta) * (c1.dag() @ c2)) / 2j
        for actual, expected in zip(network.L, expected_l, strict=True):
            np.testing.assert_allclose(actual.matrix, expected.matrix, atol=1e-12)
        np.testing.assert_allclose(network.H.matrix, expected_h.matrix, atol=1e-12)
        assert network.is_lossless


def test_cascaded_network__first_cavity_decay_weight__sums_to_kappa() -> None:
    kappa1 = 1.7
    network = cascaded_network(*two_cavities(kappa1, 0.4), 0.6)
    total = sum(abs(hs_coefficient(l, A1)) ** 2 for l in network.L)
    assert total == pytest.approx(kappa1)


def test_cascaded_network__first_cavity_drift__independent_of_second() -> None:
    kappa1, detuning = 0.9, 0.3
    network = cascaded_network(*two_cavities(kappa1, 1.4, detunings=(detuning, -0.2)), 0.7 * np.exp(0.4j))
    drift = heisenberg_drift(network.to_model(), A1)
    np.testing.assert_allclose(drift.matrix, ((-1j * detuning - kappa1 / 2) * A1).matrix, atol=1e-12)


def test_cascaded_network__second_cavity_drift__driven_by_first() -> None:
    linked = cascaded_network(*two_cavities(1.0, 1.0), 0.7)
    unlinked = cascaded_network(*two_cavities(1.0, 1.0), 0.0)
    difference = heisenberg_drift(linked.to_model(), A2) - heisenberg_drift(unlinked.to_model(), A2)
    assert difference.norm() > 0.1


def test_network_graph__feedforward_connection__equals_series_product() -> None:
    rng = np.random.default_rng(12)
    first, second = random_triplet(rng, 1), random_triplet(rng, 1)
    net = NetworkGraph((first, second), ((0, 1),), (0,), (1,))
    assert_triplets_close(eliminate_loops(net), series(second, first))


def test_bidirectional_network__random_channels__matches_closed_form() -> None:
    rng = np.random.default_rng(8)
    for _ in range(5):
        magnitude = rng.uniform(0.2, 0.9)
        eta = magnitude * np.exp(1j * rng.uniform(0, 2 * math.pi))
        kappa1, kappa2 = rng.uniform(0.2, 3.0, size=2)
        c1, c2 = math.sqrt(kappa1) * A1, math.sqrt(kappa2) * A2
        norm = math.sqrt(1 + magnitude**2)

        net = bidirectional_network(*two_cavities(kappa1, kappa2, reflection=1.0), eta)
        reduced = eliminate_loops(net)

        exchange = eta / (1 - eta**2)
        shift = eta**2 / (1 - eta**2)
        expected_h = abs(net.normalization) ** 2 * (
            exchange.imag * (c1.dag() @ c2 + c2.dag() @ c1) + shift.imag * (c1.dag() @ c1 + c2.dag() @ c2)
        )
        np.testing.assert_allclose(reduced.L[0].matrix, ((eta * c1 + c2) / norm).matrix, atol=1e-12)
        np.testing.assert_allclose(reduced.L[1].matrix, ((c1 + eta * c2) / norm).matrix, atol=1e-12)
        np.testing.assert_allclose(reduced.H.matrix, expected_h.matrix, atol=1e-12)
        assert reduced.is_lossless


def test_bidirectional_network__matched_transmission__asymmetry_quadratic_in_loss() -> None:
    losses = np.array([0.05, 0.1, 0.2])
    symmetric = np.array([1.0, 1.0]) / math.sqrt(2)
    deviations = []
    for l in losses:  # noqa: E741
        eta = math.sqrt(1 - l**2)
        reduced = eliminate_loops(bidirectional_network(*two_cavities(1.0, eta**2, reflection=1.0), eta))
        weights = np.abs([hs_coefficient(reduced.L[1], mode) for mode in (A1, A2)])
        deviations.append(np.linalg.norm(weights / np.linalg.norm(weights) - symmetric))
    exponent, _ = np.polyfit(np.log(losses), np.log(deviations), 1)
    assert exponent == pytest.approx(2, abs=0.2)


def test_bidirectional_network__no_transmission__two_independent_decays() -> None:
    reduced = eliminate_loops(bidirectional_network(*two_cavities(1.0, 2.0, reflection=1.0), 0.0))
    np.testing.assert_allclose(reduced.L[0].matrix, (math.sqrt(2.0) * A2).matrix, atol=1e-12)
    np.testing.assert_allclose(reduced.L[1].matrix, A1.matrix, atol=1e-12)
    np.testing.assert_allclose(reduced.H.matrix, 0, atol=1e-12)


def test_bidirectional_network__real_efficiency__no_hamiltonian_correction() -> None:
    for eta in (0.6, -0.6):
        reduced = eliminate_loops(bidirectional_network(*two_cavities(1.0, 1.0, reflection=1.0), eta))
        np.testing.assert_allclose(reduced.H.matrix, 0, atol=1e-12)


def test_bidirectional_network__inverting_cavities__equal_to_shifted_phase() -> None:
    eta = 0.5 * np.exp(0.7j)
    inverting = eliminate_loops(bidirectional_network(*two_cavities(1.0, 1.5, reflection=-1.0), eta))
    shifted = eliminate_loops(bidirectional_network(*two_cavities(1.0, 1.5, reflection=1.0), -eta))
    for first, second in zip(inverting.L, shifted.L, strict=True):
        np.testing.assert_allclose(first.matrix, second.matrix, atol=1e-12)
    np.testing.assert_allclose(inverting.H.matrix, shifted.H.matrix, atol=1e-12)


@pytest.mark.parametrize("eta", [1.0, 1 - 1e-12])
def test_bidirectional_network__lossless_loop__raise_ill_conditioned_network_error(eta: float) -> None:
    with pytest.raises(IllConditionedNetworkError):
        eliminate_loops(bidirectional_network(*two_cavities(1.0, 1.0, reflection=1.0), eta))


def test_network_graph__port_used_twice__raise_value_error() -> None:
    first, second = two_cavities(1.0, 1.0)
    with pytest.raises(ValueError):
        NetworkGraph((first, second), ((0, 1), (1, 1)), (0,), (0,))


def test_network_graph__feedback_through_single_port__scattering_composes() -> None:
    splitter = beam_splitter(0.6, MODES)
    mirror = cavity(A1, 1.0, ZERO, reflection=1.0)
    net = NetworkGraph((splitter, mirror), ((1, 2), (2, 1)), (0,), (0,))
    reduced = eliminate_loops(net)
    assert reduced.n_ports == 1
    assert reduced.is_lossless


def test_dispersive_coupling__resonant__decay_amplitude() -> None:
    g, kappa = 0.3, 4.0
    coupling = DispersiveCoupling(g, kappa, cav_delta=0.5, qubit_delta=0.5)
    assert coupling.decay_amplitude == pytest.approx(-2j * g / math.sqrt(kappa))
    assert coupling.validity_ratio == pytest.approx(2 * g / kappa)


def test_dispersive_coupling__uncoupled__zero_amplitude() -> None:
    assert DispersiveCoupling(0.0, 1.0, 0.0, 0.3).decay_amplitude == 0


def test_adiabatic_eliminate__strong_coupling__raise_elimination_invalid_error() -> None:
    space = HilbertSpace((2, 2, 3))
    full = LindbladModel(Operator.zero(space), (embed(bosonic_annihilator(3), space, 2),))
    coupling = DispersiveCoupling(10.0, 1.0, 0.0, 0.0)
    with pytest.raises(EliminationInvalidError):
        adiabatic_eliminate(full, (coupling, coupling))


def test_adiabatic_eliminate__wrong_structure__raise_value_error() -> None:
    full = LindbladModel(Operator.zero(MODES))
    coupling = DispersiveCoupling(0.1, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        adiabatic_eliminate(full, (coupling, coupling))
