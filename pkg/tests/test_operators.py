import numpy as np
import pytest

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

RNG = np.random.default_rng(7)


def random_operator(space: HilbertSpace) -> Operator:
    dim = space.total_dim
    return Operator(space, RNG.normal(size=(dim, dim)) + 1j * RNG.normal(size=(dim, dim)))


def test_hilbert_space__dimension_below_two__raise_value_error() -> None:
    with pytest.raises(ValueError):
        HilbertSpace((2, 1))


def test_hilbert_space__qubits__total_dim() -> None:
    expected = 8
    assert HilbertSpace.qubits(3).total_dim == expected


def test_operator__wrong_shape__raise_value_error() -> None:
    with pytest.raises(ValueError):
        Operator(HilbertSpace.qubits(2), np.eye(2))


def test_operator__different_spaces__raise_value_error() -> None:
    with pytest.raises(ValueError):
        Operator.identity(HilbertSpace.qubits(1)) + Operator.identity(HilbertSpace((3,)))


def test_operator__matrix__is_read_only() -> None:
    op = Operator.identity(HilbertSpace.qubits(1))
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_qubit_op__lower__maps_excited_to_ground() -> None:
    excited = np.array([1, 0])
    np.testing.assert_array_equal(qubit_op(QubitOpKind.LOWER).matrix @ excited, [0, 1])


def test_qubit_op__pauli_algebra() -> None:
    x, y, z = (qubit_op(kind) for kind in (QubitOpKind.X, QubitOpKind.Y, QubitOpKind.Z))
    np.testing.assert_allclose((x @ y).matrix, 1j * z.matrix)
    np.testing.assert_allclose(
        qubit_op("raise").commutator(qubit_op("lower")).matrix,
        z.matrix,
    )


def test_bosonic_annihilator__number_operator__diagonal() -> None:
    a = bosonic_annihilator(4)
    np.testing.assert_allclose((a.dag() @ a).matrix, np.diag([0, 1, 2, 3]))


def test_bosonic_annihilator__single_level__raise_value_error() -> None:
    with pytest.raises(ValueError):
        bosonic_annihilator(1)


def test_embed__second_site__kron_from_left() -> None:
    space = HilbertSpace.qubits(2)
    lower = qubit_op(QubitOpKind.LOWER)
    np.testing.assert_allclose(embed(lower, space, 1).matrix, np.kron(np.eye(2), lower.matrix))


def test_embed__mode_after_qubits__kron_with_identity_on_qubits() -> None:
    space = HilbertSpace((2, 2, 3))
    a = bosonic_annihilator(3)
    np.testing.assert_allclose(embed(a, space, 2).matrix, np.kron(np.eye(4), a.matrix))


def test_embed__reversed_sites__swaps_factors() -> None:
    space = HilbertSpace.qubits(2)
    first = random_operator(HilbertSpace.qubits(1))
    second = random_operator(HilbertSpace.qubits(1))
    local = Operator(space, np.kron(first.matrix, second.matrix))
    np.testing.assert_allclose(embed(local, space, (1, 0)).matrix, np.kron(second.matrix, first.matrix))


def test_embed__non_adjacent_sites__matches_products_of_single_site_ops() -> None:
    space = HilbertSpace((2, 3, 2))
    first = random_operator(HilbertSpace.qubits(1))
    second = random_operator(HilbertSpace.qubits(1))
    local = Operator(HilbertSpace.qubits(2), np.kron(first.matrix, second.matrix))
    expected = embed(first, space, 0) @ embed(second, space, 2)
    np.testing.assert_allclose(embed(local, space, (0, 2)).matrix, expected.matrix, atol=1e-12)


@pytest.mark.parametrize("site", [3, -1])
def test_embed__site_out_of_range__raise_value_error(site: int) -> None:
    with pytest.raises(ValueError):
        embed(qubit_op(QubitOpKind.Z), HilbertSpace.qubits(3), site)


def test_embed__dims_mismatch__raise_value_error() -> None:
    with pytest.raises(ValueError):
        embed(bosonic_annihilator(3), HilbertSpace.qubits(2), 0)


def test_partial_trace__product_operator__keeps_factor_times_trace() -> None:
    first = random_operator(HilbertSpace.qubits(1))
    second = random_operator(HilbertSpace((3,)))
    product = Operator(HilbertSpace((2, 3)), np.kron(first.matrix, second.matrix))

    kept_first = partial_trace(product, [0])
    kept_second = partial_trace(product, [1])

    assert kept_first.space.dims == (2,)
    np.testing.assert_allclose(kept_first.matrix, first.matrix * np.trace(second.matrix), atol=1e-12)
    np.testing.assert_allclose(kept_second.matrix, second.matrix * np.trace(first.matrix), atol=1e-12)


def test_partial_trace__of_embedded_operator__scales_by_traced_dimension() -> None:
    space = HilbertSpace((2, 2, 4))
    z = qubit_op(QubitOpKind.Z)
    reduced = partial_trace(embed(z, space, 1), [1])
    np.testing.assert_allclose(reduced.matrix, 8 * z.matrix)


def test_hs_coefficient__linear_combination__recovers_weight() -> None:
    x, z = qubit_op(QubitOpKind.X), qubit_op(QubitOpKind.Z)
    combination = (3 - 2j) * x + 0.5 * z
    assert hs_coefficient(combination, x) == pytest.approx(3 - 2j)
    assert hs_coefficient(combination, z) == pytest.approx(0.5)
    assert hs_coefficient(combination, qubit_op(QubitOpKind.Y)) == pytest.approx(0)


def test_is_hermitian__pauli_and_lowering() -> None:
    assert qubit_op(QubitOpKind.Y).is_hermitian()
    assert not qubit_op(QubitOpKind.LOWER).is_hermitian()
