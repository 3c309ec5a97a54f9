"""Operator-algebra reference implementations, checked against a second,
kron-built Jordan-Wigner construction that shares no code with them."""

import math

import numpy as np
import pytest

from hivqe.determinants import Determinant
from hivqe.oracle import (
    BRUTE_FORCE_SPIN_ORBITAL_LIMIT,
    brute_force_hamiltonian,
    det_to_fock_index,
    fci_ground,
    transition_matrix,
)
from hivqe.sampler import enumerate_sector

from helpers import (
    fock_vector,
    jw_annihilator,
    jw_number_conserving_hamiltonian,
    load_fixture,
    load_reference,
    random_integral_set,
)


def test_det_to_fock_index_packs_alpha_low():
    assert det_to_fock_index(Determinant(0b01, 0b00), 2) == 0b0001
    assert det_to_fock_index(Determinant(0b00, 0b01), 2) == 0b0100
    assert det_to_fock_index(Determinant(0b11, 0b10), 2) == 0b1011


def test_transition_matrix_against_kron_jordan_wigner():
    n = 3
    rng = np.random.default_rng(0)
    for _ in range(8):
        p, q = rng.integers(0, 2 * n, size=2)
        expected = jw_annihilator(2 * n, int(p)).T @ jw_annihilator(2 * n, int(q))
        assert np.array_equal(transition_matrix(n, int(p), int(q)), expected)


def test_anticommutation_relations():
    n_qubits = 4
    dim = 1 << n_qubits
    for p in range(n_qubits):
        for q in range(n_qubits):
            a_p = jw_annihilator(n_qubits, p)
            a_q = jw_annihilator(n_qubits, q)
            anti = a_p @ a_q.T + a_q.T @ a_p
            expected = np.eye(dim) if p == q else np.zeros((dim, dim))
            assert np.array_equal(anti, expected)
            assert np.array_equal(a_p @ a_q + a_q @ a_p, np.zeros((dim, dim)))


def test_number_operator_counts_sector():
    n = 3
    number = sum(transition_matrix(n, j, j) for j in range(2 * n))
    for d in enumerate_sector(3, 2, 1):
        idx = det_to_fock_index(d, 3)
        assert number[idx, idx] == 3.0


@pytest.mark.parametrize("shape", [(2, 1, 1), (3, 2, 1), (4, 2, 2)])
def test_brute_force_matches_kron_hamiltonian(shape):
    s = random_integral_set(*shape, seed=sum(shape), e_core=0.125)
    h1 = brute_force_hamiltonian(s)
    h2 = jw_number_conserving_hamiltonian(s)
    assert np.max(np.abs(h1 - h2)) < 1e-12
    assert np.allclose(h1, h1.T, atol=0)


def test_brute_force_respects_spin_orbital_limit():
    s = random_integral_set(5, 2, 2, seed=1)
    assert 2 * s.n_orb > BRUTE_FORCE_SPIN_ORBITAL_LIMIT
    with pytest.raises(ValueError):
        brute_force_hamiltonian(s)


def test_fci_ground_reproduces_frozen_references():
    ref = load_reference()
    for name, entry in ref.items():
        res = fci_ground(load_fixture(name))
        assert res.sector_size == entry["sector_size"]
        assert res.energy == pytest.approx(entry["e_fci"], abs=1e-9)


def test_fci_ground_vector_is_true_eigenvector():
    s = load_fixture("h2_0.74")
    res = fci_ground(s)
    dets = enumerate_sector(2, 1, 1)
    vec = fock_vector(dets, res.vector.amplitudes, 2)
    h = jw_number_conserving_hamiltonian(s)
    residual = h @ vec - res.energy * vec
    assert np.max(np.abs(residual)) < 1e-8


def test_fci_ground_enforces_sector_limit():
    s = random_integral_set(6, 3, 3, seed=2)
    assert math.comb(6, 3) ** 2 == 400
    with pytest.raises(ValueError):
        fci_ground(s, limit=100)
