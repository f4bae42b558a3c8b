import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from exchange_qc.errors import DomainError, InvalidPairError, InvalidStepError
from exchange_qc.spin_core import (
    SpinRegister,
    commutator,
    exchange_hamiltonian,
    exchange_unitary,
    is_hermitian,
    is_unitary,
    matrix_exp_hermitian,
    parallel_step_unitary,
    phase_distance,
    product_state,
    spin_operators,
    swap_operator,
    total_spin_operators,
    total_spin_squared,
)

finite_tau = st.floats(-3, 3, allow_nan=False)


def pair_in(n):
    return st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])


# --- registers and operators -------------------------------------------------

def test_register_bounds():
    assert SpinRegister(6).dim == 64
    for bad in (0, 13):
        with pytest.raises(DomainError):
            SpinRegister(bad)
    with pytest.raises(IndexError):
        SpinRegister(3).check_site(3)


def test_single_spin_sz():
    _, _, sz = spin_operators(SpinRegister(1), 0)
    assert np.allclose(sz, np.diag([0.5, -0.5]))


def test_embedded_sz_spectrum():
    _, _, sz = spin_operators(SpinRegister(2), 0)
    assert np.allclose(sz, np.kron(np.diag([0.5, -0.5]), np.eye(2)))
    assert np.allclose(np.sort(np.linalg.eigvalsh(sz)), [-0.5, -0.5, 0.5, 0.5])


def test_all_up_total_sz():
    reg = SpinRegister(3)
    _, _, Sz = total_spin_operators(reg)
    up = product_state("uuu")
    assert np.allclose(Sz @ up, 1.5 * up)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_spin_operators_match_oracle(n):
    reg = SpinRegister(n)
    for site in range(n):
        for mine, ref in zip(spin_operators(reg, site), (oracle.SX, oracle.SY, oracle.SZ)):
            assert np.allclose(mine, oracle.site_op(ref, site, n), atol=1e-15)
    assert np.allclose(total_spin_squared(reg), oracle.total_s2(n), atol=1e-13)


def test_product_state_indexing():
    assert np.argmax(np.abs(product_state("udu"))) == oracle.basis_index("udu") == 0b010


# --- exchange ----------------------------------------------------------------

def test_two_spin_exchange_spectrum():
    H = exchange_hamiltonian(SpinRegister(2), 0, 1)
    assert np.allclose(np.sort(np.linalg.eigvalsh(H)), [-0.75, 0.25, 0.25, 0.25])


def test_singlet_eigenstate():
    H = exchange_hamiltonian(SpinRegister(2), 0, 1)
    singlet = (product_state("ud") - product_state("du")) / np.sqrt(2)
    assert np.allclose(H @ singlet, -0.75 * singlet)


def test_invalid_pair():
    with pytest.raises(InvalidPairError):
        exchange_hamiltonian(SpinRegister(3), 1, 1)
    with pytest.raises(InvalidPairError):
        exchange_unitary(SpinRegister(3), 2, 2, 0.1)


def test_nonfinite_tau():
    with pytest.raises(DomainError):
        exchange_unitary(SpinRegister(2), 0, 1, np.inf)


def test_half_period_is_swap():
    U = exchange_unitary(SpinRegister(2), 0, 1, 0.5)
    out = U @ product_state("ud")
    assert phase_distance(out.reshape(-1, 1), product_state("du").reshape(-1, 1)) < 1e-14
    assert phase_distance(U, swap_operator(SpinRegister(2), 0, 1)) < 1e-14


def test_zero_and_full_period():
    reg = SpinRegister(2)
    assert np.allclose(exchange_unitary(reg, 0, 1, 0.0), np.eye(4))
    U1 = exchange_unitary(reg, 0, 1, 1.0)
    assert phase_distance(U1, np.eye(4)) < 1e-14
    assert not np.allclose(U1, np.eye(4))  # a genuine global phase


def test_closed_form_at_theta_pi():
    # tau = 1/2: exp(i pi S.S) = e^{-i pi/4} * i * SWAP
    U = exchange_unitary(SpinRegister(2), 0, 1, 0.5)
    assert np.allclose(U, np.exp(-0.25j * np.pi) * 1j * swap_operator(SpinRegister(2), 0, 1), atol=1e-15)


@given(n=st.integers(2, 5), data=st.data(), tau=finite_tau)
def test_exchange_unitary_matches_expm(n, data, tau):
    i, j = data.draw(pair_in(n))
    U = exchange_unitary(SpinRegister(n), i, j, tau)
    assert np.max(np.abs(U - oracle.exchange(i, j, n, tau))) < 1e-12
    assert is_unitary(U)


@given(n=st.integers(2, 6), data=st.data())
def test_exchange_conserves_total_spin(n, data):
    i, j = data.draw(pair_in(n))
    reg = SpinRegister(n)
    H = exchange_hamiltonian(reg, i, j)
    assert np.max(np.abs(commutator(H, total_spin_squared(reg)))) < 1e-12
    assert np.max(np.abs(commutator(H, total_spin_operators(reg)[2]))) < 1e-12
    assert is_hermitian(H)


@given(a=finite_tau, b=finite_tau, m=st.integers(-3, 3))
def test_one_parameter_group_and_periodicity(a, b, m):
    reg = SpinRegister(3)
    U = exchange_unitary(reg, 0, 2, a) @ exchange_unitary(reg, 0, 2, b)
    assert np.max(np.abs(U - exchange_unitary(reg, 0, 2, a + b))) < 1e-12
    assert phase_distance(exchange_unitary(reg, 0, 2, a + m), exchange_unitary(reg, 0, 2, a)) < 1e-12


# --- parallel steps ----------------------------------------------------------

def test_empty_step_is_identity():
    assert np.allclose(parallel_step_unitary(SpinRegister(3), []), np.eye(8))


def test_disjoint_pairs_factorise():
    reg = SpinRegister(4)
    U = parallel_step_unitary(reg, [(0, 1, 0.3), (2, 3, 0.7)])
    ref = exchange_unitary(reg, 0, 1, 0.3) @ exchange_unitary(reg, 2, 3, 0.7)
    assert np.max(np.abs(U - ref)) < 1e-12


def test_overlapping_pairs_do_not_factorise():
    reg = SpinRegister(3)
    U = parallel_step_unitary(reg, [(0, 1, 0.3), (1, 2, 0.3)])
    ref = exchange_unitary(reg, 0, 1, 0.3) @ exchange_unitary(reg, 1, 2, 0.3)
    assert np.max(np.abs(U - ref)) > 1e-3
    assert np.max(np.abs(U - oracle.step([(0, 1, 0.3), (1, 2, 0.3)], 3))) < 1e-12


def test_duplicate_pair_in_step():
    with pytest.raises(InvalidStepError):
        parallel_step_unitary(SpinRegister(3), [(0, 1, 0.1), (1, 0, 0.2)])


@given(taus=st.lists(st.floats(-1, 1, allow_nan=False), min_size=5, max_size=5))
def test_parallel_step_properties(taus):
    reg = SpinRegister(4)
    pairs = [(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)]
    couplings = [(i, j, t) for (i, j), t in zip(pairs, taus)]
    U = parallel_step_unitary(reg, couplings)
    assert is_unitary(U)
    assert np.max(np.abs(commutator(U, total_spin_squared(reg)))) < 1e-12
    assert np.max(np.abs(U - oracle.step(couplings, 4))) < 1e-11


# --- spectral exponential ----------------------------------------------------

def test_exp_of_zero():
    assert np.allclose(matrix_exp_hermitian(np.zeros((3, 3)), 1.7), np.eye(3))


def test_exp_of_single_spin_sz():
    sz = np.diag([0.5, -0.5])
    assert np.allclose(matrix_exp_hermitian(sz, 2 * np.pi), np.diag([np.exp(1j * np.pi), np.exp(-1j * np.pi)]))
    assert np.allclose(matrix_exp_hermitian(sz, np.pi), np.diag([np.exp(0.5j * np.pi), np.exp(-0.5j * np.pi)]))


def test_exp_rejects_non_hermitian():
    with pytest.raises(DomainError):
        matrix_exp_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(-1, 1, allow_nan=False))
def test_exp_matches_taylor(seed, scale):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    H = (A + A.conj().T) / 2
    H /= max(1.0, np.linalg.norm(H, 2))
    assert np.max(np.abs(matrix_exp_hermitian(H, scale) - oracle.taylor_exp(1j * scale * H))) < 1e-10


def test_exp_matches_closed_form_for_pair():
    reg = SpinRegister(3)
    for tau in (0.1, 0.37, 0.5, 1.3):
        U = matrix_exp_hermitian(exchange_hamiltonian(reg, 0, 2), 2 * np.pi * tau)
        assert np.max(np.abs(U - exchange_unitary(reg, 0, 2, tau))) < 1e-12


# --- phase distance ----------------------------------------------------------

@given(phi=st.floats(0, 2 * np.pi))
def test_phase_distance_ignores_global_phase(phi):
    rng = np.random.default_rng(0)
    U = oracle.haar(4, rng)
    assert phase_distance(np.exp(1j * phi) * U, U) < 1e-14


def test_phase_distance_shape_mismatch():
    with pytest.raises(DomainError):
        phase_distance(np.eye(2), np.eye(4))
