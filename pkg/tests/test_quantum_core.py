import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasewalk.quantum_core import (
    DimensionError,
    HermitianOperator,
    StateVector,
    TruncationError,
    UnitaryOperator,
    coherent_state,
    fock_state,
    ladder_and_pauli,
    phase_basis,
    phase_states,
    propagator,
    rotate_walker,
    tensor,
    unitarity_defect,
)

from conftest import random_hermitian, random_state


def expm_taylor(m, terms=50):
    """Scaling-and-squaring with a truncated Taylor series; no eigensolver."""
    norm = np.max(np.sum(np.abs(m), axis=1))
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    a = m / 2**squarings
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ a / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


class TestCoherentState:
    def test_vacuum(self):
        s = coherent_state(0, 8)
        assert s.amplitudes[0] == 1
        assert np.all(s.amplitudes[1:] == 0)

    def test_mean_photon_number(self):
        s = coherent_state(3, 64)
        n = ladder_and_pauli(64).n_op
        assert s.expectation(n) == pytest.approx(9.0, abs=1e-9)

    def test_leakage_matches_exact_poisson_tail(self):
        mpmath.mp.dps = 50
        exact_tail = 1 - mpmath.nsum(lambda n: mpmath.e**-9 * mpmath.mpf(9) ** n / mpmath.factorial(n), [0, 63])
        assert float(exact_tail) < 1e-12
        assert coherent_state(3, 64).leakage < 1e-12

    def test_truncation_error(self):
        with pytest.raises(TruncationError, match="fock_dim"):
            coherent_state(3, 16)

    def test_amplitudes_formula(self):
        alpha = 0.7 - 0.4j
        s = coherent_state(alpha, 30)
        expected = [
            math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n)) for n in range(30)
        ]
        assert np.allclose(s.amplitudes, expected, atol=1e-14)

    def test_with_coin(self):
        s = coherent_state(1.0, 20, np.array([1, 0]))
        assert s.coin_dim == 2 and s.dim == 40
        assert np.all(s.as_grid()[:, 1] == 0)


class TestPhaseStates:
    def test_single(self):
        (s,) = phase_states(1)
        assert s.amplitudes.tolist() == [1]

    def test_theta_zero_uniform(self):
        assert np.allclose(phase_states(4)[0].amplitudes, [0.5] * 4, atol=1e-15)

    def test_orthonormal(self):
        b = phase_basis(8)
        assert np.allclose(b.conj().T @ b, np.eye(8), atol=1e-12)

    @pytest.mark.parametrize("s", [1, 2, 5, 16, 64])
    def test_resolution_of_identity(self, s):
        b = phase_basis(s)
        assert np.max(np.abs(b @ b.conj().T - np.eye(s))) < 1e-10


class TestLadder:
    def test_lowering(self):
        ops = ladder_and_pauli(6)
        out = ops.a @ fock_state(1, 6).amplitudes
        assert np.allclose(out, fock_state(0, 6).amplitudes)

    def test_number(self):
        ops = ladder_and_pauli(8)
        v = fock_state(5, 8).amplitudes
        assert np.allclose(ops.n_op @ v, 5 * v)

    def test_commutator_below_edge(self):
        d = 10
        ops = ladder_and_pauli(d)
        comm = ops.a @ ops.a_dagger - ops.a_dagger @ ops.a
        assert np.allclose(comm[: d - 1, : d - 1], np.eye(d - 1))

    def test_pauli_convention(self):
        ops = ladder_and_pauli(2)
        assert np.allclose(ops.sigma_z @ [1, 0], [1, 0])
        assert np.allclose(ops.sigma_plus @ [0, 1], [1, 0])
        assert np.allclose(ops.sigma_plus + ops.sigma_minus, ops.sigma_x)
        assert np.allclose(ops.a_dagger, ops.a.conj().T)
        assert np.allclose(ops["n_op"], ops.a_dagger @ ops.a)

    def test_needs_two_levels(self):
        with pytest.raises(DimensionError):
            ladder_and_pauli(1)


class TestTensor:
    def test_identities(self):
        i2 = HermitianOperator(np.eye(2), "I")
        assert np.array_equal(tensor(i2, i2).matrix, np.eye(4))

    def test_eigenvalue_product(self):
        ops = ladder_and_pauli(3)
        op = tensor(HermitianOperator(ops.n_op, "n"), HermitianOperator(ops.sigma_z, "z"))
        v = fock_state(2, 3, np.array([0, 1])).amplitudes
        assert np.allclose(op.matrix @ v, -2 * v)

    def test_elementwise_kronecker_oracle(self):
        rng = np.random.default_rng(3)
        a = random_hermitian(rng, 3)
        b = random_hermitian(rng, 2)
        out = tensor(HermitianOperator(a), HermitianOperator(b)).matrix
        for i in range(3):
            for j in range(3):
                for k in range(2):
                    for l in range(2):
                        assert out[2 * i + k, 2 * j + l] == pytest.approx(a[i, j] * b[k, l], abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            tensor(np.eye(3), np.eye(2), fock_dim=4)
        with pytest.raises(DimensionError):
            tensor(np.eye(3), np.eye(3), fock_dim=3, coin_dim=2)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(TypeError):
            tensor(HermitianOperator(np.eye(2)), UnitaryOperator(np.eye(2)))


class TestPropagator:
    def test_zero_generator(self):
        u = propagator(HermitianOperator(np.zeros((5, 5))), 3.7)
        assert np.allclose(u.matrix, np.eye(5), atol=1e-15)

    def test_sigma_z(self):
        u = propagator(HermitianOperator(np.diag([1.0, -1.0])), math.pi / 2)
        assert np.allclose(u.matrix, np.diag([np.exp(-1j * math.pi / 2), np.exp(1j * math.pi / 2)]), atol=1e-14)

    def test_matches_taylor_oracle(self):
        rng = np.random.default_rng(11)
        h = random_hermitian(rng, 16)
        u = propagator(HermitianOperator(h), 1.0).matrix
        assert np.max(np.abs(u - expm_taylor(-1j * h))) < 1e-8

    def test_not_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            HermitianOperator(np.array([[0, 1], [0, 0]]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 24), t=st.floats(-50, 50))
def test_propagator_unitary_and_norm_preserving(seed, dim, t):
    rng = np.random.default_rng(seed)
    u = propagator(HermitianOperator(random_hermitian(rng, dim, scale=3.0)), t)
    assert unitarity_defect(u.matrix) < 1e-9
    psi = random_state(rng, dim, 1)
    assert abs(u.apply(psi).norm() - 1) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t1=st.floats(-10, 10), t2=st.floats(-10, 10))
def test_propagator_group_law(seed, t1, t2):
    rng = np.random.default_rng(seed)
    h = HermitianOperator(random_hermitian(rng, 12))
    lhs = propagator(h, t1).matrix @ propagator(h, t2).matrix
    assert np.max(np.abs(lhs - propagator(h, t1 + t2).matrix)) < 1e-8


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 20))
def test_energy_conserved(seed, t):
    rng = np.random.default_rng(seed)
    h = HermitianOperator(random_hermitian(rng, 10))
    psi = random_state(rng, 10, 1)
    assert propagator(h, t).apply(psi).expectation(h) == pytest.approx(psi.expectation(h), abs=1e-8)


def test_state_vector_invariants():
    with pytest.raises(ValueError, match="norm"):
        StateVector(np.array([1.0, 1.0]), 1, 2)
    with pytest.raises(DimensionError):
        StateVector(np.array([1.0]), 1, 3)
    s = coherent_state(1.0, 10)
    assert not s.amplitudes.flags.writeable


def test_rotate_walker_shifts_phase_states():
    s = 16
    basis = phase_basis(s)
    state = StateVector(basis[:, 3], s, 1)
    rotated = rotate_walker(state, 2 * 2 * math.pi / s)
    assert np.allclose(rotated.amplitudes, basis[:, 5], atol=1e-12)
