"""
Test complex linear-algebra primitives

Covers the tensor product, partial trace, Hermitian eigensolver and
local operator application on qubit axes.
"""
import itertools

import numpy as np
import pytest

from dissipkit.exc import ContractViolationException, NumericalCorruptionException
from dissipkit.qmath import (
    PAULI_X,
    PAULI_Z,
    RegisterShape,
    apply_local_operator,
    adjoint,
    apply_superoperator,
    embed_operator,
    frobenius_norm,
    herm_eig,
    matmul,
    partial_trace,
    psd_sqrt,
    superoperator,
    tensor,
    trace,
)
from tests.conftest import assert_matrix_close

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)


class TestRegisterShape:
    """Test register shape arithmetic"""

    def test_dim(self):
        assert RegisterShape(3).dim == 8

    def test_from_dim(self):
        assert RegisterShape.from_dim(16).qubit_count == 4

    @pytest.mark.parametrize("dim", [0, 3, 6])
    def test_from_dim_rejects_non_power_of_two(self, dim):
        with pytest.raises(ContractViolationException):
            RegisterShape.from_dim(dim)

    def test_negative_qubit_count(self):
        with pytest.raises(ContractViolationException):
            RegisterShape(-1)


class TestMatrixAlgebra:
    """Test the checked matrix helpers"""

    def test_matmul_identity(self):
        assert_matrix_close(matmul(np.eye(2), PAULI_X), PAULI_X)

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ContractViolationException):
            matmul(np.eye(2), np.eye(4))

    def test_adjoint_involution(self):
        a = np.array([[1.0, 2.0j], [3.0, 4.0 - 1.0j]])
        assert_matrix_close(adjoint(adjoint(a)), a)

    def test_trace_of_projector(self):
        assert trace(np.diag([1.0, 0.0])) == 1.0

    def test_trace_is_linear(self):
        assert trace(2.0 * PAULI_Z + np.eye(2)).real == pytest.approx(2.0)

    def test_trace_needs_square(self):
        with pytest.raises(ContractViolationException):
            trace(np.ones((2, 4)))

    def test_frobenius_norm(self):
        assert frobenius_norm(np.eye(4)) == pytest.approx(2.0)


class TestTensor:
    """Test the Kronecker product"""

    def test_first_factor_is_most_significant(self):
        one = np.array([[0, 0], [0, 1]])
        zero = np.array([[1, 0], [0, 0]])
        result = tensor(one, zero)
        # |10⟩ is basis index 2
        assert result[2, 2] == 1
        assert np.count_nonzero(result) == 1

    def test_dimension_limit(self):
        with pytest.raises(ContractViolationException):
            tensor(np.eye(512), np.eye(256))

    def test_non_finite_input(self):
        with pytest.raises(NumericalCorruptionException):
            tensor(np.array([[np.nan]]), np.eye(2))

    def test_pauli_index_formula(self):
        out = tensor(PAULI_X, PAULI_Z)
        for i1, i2, j1, j2 in itertools.product(range(2), repeat=4):
            assert out[i1 * 2 + i2, j1 * 2 + j2] == PAULI_X[i1, j1] * PAULI_Z[i2, j2]

    @pytest.mark.parametrize("da,db", [(2, 2), (2, 4), (4, 2), (8, 2)])
    def test_trace_is_multiplicative(self, rng, da, db):
        a = rng.normal(size=(da, da)) + 1j * rng.normal(size=(da, da))
        b = rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db))
        assert trace(tensor(a, b)) == pytest.approx(trace(a) * trace(b), abs=1e-12)


class TestPartialTrace:
    """Test tracing out a front or back subsystem"""

    @pytest.mark.parametrize("position", ["front", "back"])
    def test_bell_reduces_to_maximally_mixed(self, bell_state, position):
        reduced = partial_trace(bell_state.mat, RegisterShape(1), RegisterShape(1), position)
        assert_matrix_close(reduced, np.eye(2) / 2)

    def test_product_state_back(self, rng):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a = a @ a.conj().T
        a /= np.trace(a)
        b = np.diag([0.25, 0.75, 0.0, 0.0])
        reduced = partial_trace(np.kron(a, b), RegisterShape(1), RegisterShape(2), "back")
        assert_matrix_close(reduced, a)

    def test_product_state_front(self):
        a = np.diag([0.3, 0.7])
        b = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
        reduced = partial_trace(np.kron(a, b), RegisterShape(1), RegisterShape(1), "front")
        assert_matrix_close(reduced, b)

    def test_trace_preserved(self, random_rho):
        reduced = partial_trace(random_rho.mat, RegisterShape(1), RegisterShape(1))
        assert abs(np.trace(reduced) - 1.0) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolationException):
            partial_trace(np.eye(8) / 8, RegisterShape(1), RegisterShape(1))

    def test_unknown_position(self):
        with pytest.raises(ContractViolationException):
            partial_trace(np.eye(4) / 4, RegisterShape(1), RegisterShape(1), "middle")


class TestHermEig:
    """Test the Hermitian eigensolver"""

    def test_diagonal_sorted(self):
        values, vectors = herm_eig(np.diag([1.0, -1.0]))
        np.testing.assert_allclose(values, [-1.0, 1.0])
        assert_matrix_close(np.abs(vectors), [[0, 1], [1, 0]])

    def test_pauli_x(self):
        values, _ = herm_eig(PAULI_X)
        np.testing.assert_allclose(values, [-1.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize("dim", [2, 4, 8, 16])
    def test_matches_numpy(self, rng, dim):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = g + g.conj().T
        values, vectors = herm_eig(h)
        np.testing.assert_allclose(values, np.linalg.eigvalsh(h), atol=1e-9)
        assert_matrix_close(vectors @ np.diag(values) @ vectors.conj().T, h, atol=1e-9)
        assert_matrix_close(vectors.conj().T @ vectors, np.eye(dim), atol=1e-9)

    def test_large_matrix_delegates(self, rng):
        dim = 512
        g = rng.normal(size=(dim, dim))
        h = g + g.T
        values, _ = herm_eig(h)
        np.testing.assert_allclose(values, np.linalg.eigvalsh(h), atol=1e-8)

    def test_degenerate_spectrum(self):
        values, vectors = herm_eig(np.eye(4))
        np.testing.assert_allclose(values, np.ones(4))
        assert_matrix_close(vectors.conj().T @ vectors, np.eye(4))

    def test_nan_input(self):
        with pytest.raises(NumericalCorruptionException):
            herm_eig(np.array([[np.nan, 0], [0, 1]]))

    def test_non_square(self):
        with pytest.raises(ContractViolationException):
            herm_eig(np.zeros((2, 3)))

    def test_psd_sqrt_squares_back(self, random_rho):
        root = psd_sqrt(random_rho.mat)
        assert_matrix_close(root @ root, random_rho.mat, atol=1e-9)


class TestLocalOperators:
    """Test applying operators to selected qubit axes"""

    def test_embed_middle_qubit(self):
        expected = np.kron(np.kron(np.eye(2), PAULI_X), np.eye(2))
        assert_matrix_close(embed_operator(PAULI_X, [1], 3), expected)

    def test_embed_reversed_targets(self):
        assert_matrix_close(embed_operator(CNOT, [1, 0], 2), SWAP @ CNOT @ SWAP)

    def test_embed_two_qubit_on_non_adjacent(self):
        full = embed_operator(CNOT, [0, 2], 3)
        # control qubit 0, target qubit 2: |100⟩ -> |101⟩
        assert full[5, 4] == 1

    def test_local_conjugation_matches_dense(self, rng):
        rho = get_random_state(rng, 3)
        dense = embed_operator(PAULI_Z, [2], 3)
        assert_matrix_close(apply_local_operator(PAULI_Z, rho, [2], 3), dense @ rho @ dense)

    def test_superoperator_matches_conjugation(self, rng):
        rho = get_random_state(rng, 2)
        sop = superoperator([CNOT])
        dense = embed_operator(CNOT, [1, 0], 2)
        assert_matrix_close(apply_superoperator(sop, rho, [1, 0], 2), dense @ rho @ dense.conj().T)

    def test_duplicate_targets(self):
        with pytest.raises(ContractViolationException):
            embed_operator(CNOT, [1, 1], 2)

    def test_target_out_of_range(self):
        with pytest.raises(ContractViolationException):
            embed_operator(PAULI_X, [3], 3)

    def test_operator_arity_mismatch(self):
        with pytest.raises(ContractViolationException):
            embed_operator(CNOT, [0], 2)


def get_random_state(rng, n):
    g = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(size=(2 ** n, 2 ** n))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
