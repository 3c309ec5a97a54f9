"""Subspace Hamiltonian assembly and the Davidson ground-state solver."""

import numpy as np
import pytest

from hivqe.determinants import slater_condon
from hivqe.eigensolver import (
    CIVector,
    dump_matrix,
    ground_state,
    load_matrix,
    project,
)
from hivqe.oracle import brute_force_hamiltonian, det_to_fock_index
from hivqe.sampler import enumerate_sector

from helpers import load_fixture, load_reference, random_integral_set


def dense_of(h):
    return h.matrix.toarray()


def test_project_is_symmetric_with_core_on_diagonal():
    s = random_integral_set(4, 2, 2, seed=1, e_core=1.75)
    dets = enumerate_sector(4, 2, 2)
    mat = dense_of(project(dets, s))
    assert np.allclose(mat, mat.T, atol=0)
    for i, d in enumerate(dets):
        assert mat[i, i] == pytest.approx(
            slater_condon(d, d, s) + 1.75, abs=1e-13)


def test_project_matches_operator_algebra():
    s = random_integral_set(3, 1, 2, seed=14, e_core=-0.5)
    dets = enumerate_sector(3, 1, 2)
    mat = dense_of(project(dets, s))
    dense = brute_force_hamiltonian(s)
    idx = [det_to_fock_index(d, 3) for d in dets]
    assert np.max(np.abs(mat - dense[np.ix_(idx, idx)])) < 1e-12


def test_project_partial_subspace_rows():
    """Off-diagonal coupling buckets must find every pair even in a sparse,
    arbitrarily ordered subset of the sector."""
    s = random_integral_set(5, 2, 2, seed=30)
    dets = enumerate_sector(5, 2, 2)
    rng = np.random.default_rng(6)
    pick = [dets[i] for i in rng.permutation(len(dets))[:37]]
    mat = dense_of(project(pick, s))
    for i, di in enumerate(pick):
        for j, dj in enumerate(pick):
            assert mat[i, j] == pytest.approx(
                slater_condon(di, dj, s) + (s.e_core if i == j else 0.0),
                abs=1e-12)


def test_davidson_tight_matches_dense():
    s = random_integral_set(4, 2, 2, seed=17, e_core=0.3)
    h = project(enumerate_sector(4, 2, 2), s)
    dense_energy = float(np.linalg.eigvalsh(dense_of(h))[0])
    c = ground_state(h, "tight", dense_cutoff=1)  # force the iterative path
    assert c.energy == pytest.approx(dense_energy, abs=1e-9)
    # and the dense path agrees with itself
    c2 = ground_state(h, "tight")
    assert c2.energy == pytest.approx(dense_energy, abs=1e-12)


def test_davidson_on_fixture_sectors():
    ref = load_reference()
    for name in ("h4_chain", "lih"):
        s = load_fixture(name)
        h = project(enumerate_sector(s.n_orb, s.n_alpha, s.n_beta), s)
        c = ground_state(h, "tight", dense_cutoff=1)
        assert c.energy == pytest.approx(ref[name]["e_fci"], abs=1e-9)


def test_loose_mode_is_variational_upper_bound():
    s = random_integral_set(4, 2, 2, seed=23)
    h = project(enumerate_sector(4, 2, 2), s)
    tight = ground_state(h, "tight", dense_cutoff=1)
    loose = ground_state(h, "loose", dense_cutoff=1)
    assert loose.energy >= tight.energy - 1e-10


def test_sign_convention_largest_amplitude_positive():
    for seed in range(4):
        s = random_integral_set(4, 2, 1, seed=40 + seed)
        h = project(enumerate_sector(4, 2, 1), s)
        for kwargs in ({"dense_cutoff": 1}, {}):
            c = ground_state(h, "tight", **kwargs)
            assert c.amplitudes[np.argmax(np.abs(c.amplitudes))] > 0


def test_warm_start_accepts_previous_vector():
    s = random_integral_set(4, 2, 2, seed=2)
    h = project(enumerate_sector(4, 2, 2), s)
    first = ground_state(h, "tight", dense_cutoff=1)
    again = ground_state(h, "tight", guess=first, dense_cutoff=1)
    assert again.energy == pytest.approx(first.energy, abs=1e-10)
    assert np.allclose(np.abs(again.amplitudes), np.abs(first.amplitudes),
                       atol=1e-6)


def test_degenerate_ground_state_energy_still_exact():
    """A doubly degenerate minimum must not trap the deflated solver."""
    rng = np.random.default_rng(12)
    q, _ = np.linalg.qr(rng.normal(size=(40, 40)))
    evals = np.concatenate(([-2.0, -2.0], rng.uniform(-1.0, 3.0, size=38)))
    mat = q @ np.diag(evals) @ q.T
    mat = (mat + mat.T) / 2
    from scipy.sparse import csr_matrix

    from hivqe.eigensolver import SparseSubspaceHamiltonian

    h = SparseSubspaceHamiltonian(csr_matrix(mat))
    c = ground_state(h, "tight", dense_cutoff=1)
    assert c.energy == pytest.approx(-2.0, abs=1e-9)


def test_civector_requires_unit_norm():
    with pytest.raises(ValueError):
        CIVector(np.array([0.5, 0.5]), energy=-1.0)
    CIVector(np.array([1.0, 0.0]), energy=-1.0)  # exact norm passes


def test_interlacing_under_subspace_growth():
    s = random_integral_set(4, 2, 2, seed=77)
    dets = enumerate_sector(4, 2, 2)
    rng = np.random.default_rng(3)
    order = list(rng.permutation(len(dets)))
    energies = []
    for size in (4, 9, 18, 36):
        h = project([dets[i] for i in order[:size]], s)
        energies.append(ground_state(h, "tight").energy)
    assert all(e2 <= e1 + 1e-10 for e1, e2 in zip(energies, energies[1:]))


def test_dump_load_matrix_roundtrip(tmp_path):
    s = random_integral_set(3, 2, 1, seed=5, e_core=0.9)
    h = project(enumerate_sector(3, 2, 1), s)
    path = tmp_path / "h.bin"
    dump_matrix(h, path)
    again = load_matrix(path)
    assert np.array_equal(dense_of(again), dense_of(h))
