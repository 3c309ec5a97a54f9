"""Brute-force reference implementations for tests and acceptance checks.

brute_force_hamiltonian builds the Hamiltonian over the full occupation-number
basis by applying second-quantized operator strings with explicit sign
tracking: no Slater-Condon shortcuts, no shared code with the fast path, so
agreement between the two is meaningful. fci_ground solves the full symmetry
sector exactly with the production assembly and eigensolver.

Spin-orbital convention: index p in [0, n_orb) is alpha orbital p, index
n_orb + p is beta orbital p (alpha block first, matching the determinant
phase convention). Basis state m of the 2**(2*n_orb)-dimensional Fock space
occupies spin orbital t iff bit t of m is set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .determinants import Determinant
from .eigensolver import CIVector, ground_state, project
from .integrals import IntegralSet, get_eri
from .sampler import enumerate_sector, sector_size

__all__ = [
    "FciResult",
    "fci_ground",
    "brute_force_hamiltonian",
    "transition_matrix",
    "det_to_fock_index",
    "ORACLE_SECTOR_LIMIT",
    "BRUTE_FORCE_SPIN_ORBITAL_LIMIT",
]

ORACLE_SECTOR_LIMIT = 2_000_000
BRUTE_FORCE_SPIN_ORBITAL_LIMIT = 8


@dataclass(frozen=True)
class FciResult:
    energy: float
    vector: CIVector
    sector_size: int


def fci_ground(s: IntegralSet, limit: int = ORACLE_SECTOR_LIMIT) -> FciResult:
    """Exact ground state over the full symmetry sector."""
    count = sector_size(s.n_orb, s.n_alpha, s.n_beta)
    if count > limit:
        raise ValueError(f"sector of {count} determinants exceeds oracle limit {limit}")
    dets = enumerate_sector(s.n_orb, s.n_alpha, s.n_beta, max_states=limit)
    c = ground_state(project(dets, s), mode="tight")
    return FciResult(c.energy, c, count)


def _apply_annihilate(masks, t: int):
    """a_t on a signed superposition {mask: coefficient}."""
    out = {}
    bit = 1 << t
    below = bit - 1
    for mask, coeff in masks.items():
        if mask & bit:
            sign = -1.0 if (mask & below).bit_count() & 1 else 1.0
            out[mask ^ bit] = out.get(mask ^ bit, 0.0) + sign * coeff
    return out


def _apply_create(masks, t: int):
    """a_t^dagger on a signed superposition."""
    out = {}
    bit = 1 << t
    below = bit - 1
    for mask, coeff in masks.items():
        if not mask & bit:
            sign = -1.0 if (mask & below).bit_count() & 1 else 1.0
            out[mask | bit] = out.get(mask | bit, 0.0) + sign * coeff
    return out


def _apply_string(mask: int, ops) -> dict:
    """Apply (kind, spin-orbital) operator pairs right-to-left to |mask>."""
    state = {mask: 1.0}
    for kind, t in reversed(ops):
        if kind == "-":
            state = _apply_annihilate(state, t)
        else:
            state = _apply_create(state, t)
        if not state:
            break
    return state


def transition_matrix(n_orb: int, p: int, q: int) -> np.ndarray:
    """Dense a_p^dagger a_q over the full Fock space (spin-orbital indices).

    Building block for operator-level cross-checks (density matrices,
    rotation generators). Limited to 8 spin orbitals like the Hamiltonian.
    """
    n_so = 2 * n_orb
    if n_so > BRUTE_FORCE_SPIN_ORBITAL_LIMIT:
        raise ValueError(f"{n_so} spin orbitals exceed the brute-force limit")
    dim = 1 << n_so
    out = np.zeros((dim, dim))
    for m in range(dim):
        for mask, coeff in _apply_string(m, [("+", p), ("-", q)]).items():
            out[mask, m] += coeff
    return out


def brute_force_hamiltonian(s: IntegralSet) -> np.ndarray:
    """Dense H over all 2**(2*n_orb) occupation states, by operator algebra.

    H = sum_pq h_pq sum_sigma a+_{p sigma} a_{q sigma}
        + 1/2 sum_pqrs (pq|rs) sum_{sigma tau} a+_{p sigma} a+_{r tau}
          a_{s tau} a_{q sigma}
        + e_core * I
    """
    n_orb = s.n_orb
    n_so = 2 * n_orb
    if n_so > BRUTE_FORCE_SPIN_ORBITAL_LIMIT:
        raise ValueError(f"{n_so} spin orbitals exceed the brute-force limit")
    dim = 1 << n_so
    h = np.zeros((dim, dim))

    spins = (0, n_orb)  # offsets: alpha block, beta block
    one_body_terms = []
    for p in range(n_orb):
        for q in range(n_orb):
            if s.one_body[p, q] != 0.0:
                one_body_terms.append((p, q, s.one_body[p, q]))
    two_body_terms = []
    for p in range(n_orb):
        for q in range(n_orb):
            for r in range(n_orb):
                for t in range(n_orb):
                    v = get_eri(s, p, q, r, t)
                    if v != 0.0:
                        two_body_terms.append((p, q, r, t, 0.5 * v))

    for m in range(dim):
        for p, q, v in one_body_terms:
            for off in spins:
                for mask, coeff in _apply_string(m, [("+", p + off), ("-", q + off)]).items():
                    h[mask, m] += v * coeff
        for p, q, r, t, v in two_body_terms:
            for off_s in spins:
                for off_t in spins:
                    ops = [
                        ("+", p + off_s),
                        ("+", r + off_t),
                        ("-", t + off_t),
                        ("-", q + off_s),
                    ]
                    for mask, coeff in _apply_string(m, ops).items():
                        h[mask, m] += v * coeff
        h[m, m] += s.e_core
    return h


def det_to_fock_index(d: Determinant, n_orb: int) -> int:
    """Map a determinant to its occupation-basis index (alpha block low bits)."""
    return d.alpha_mask | (d.beta_mask << n_orb)
