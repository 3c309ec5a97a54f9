"""Shared fixtures and independent oracles for the test suite.

The Jordan-Wigner matrices built here use plain numpy kron products and know
nothing about the package's bit tricks; they exist so the operator-algebra
module can itself be checked against something independent.
"""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

import numpy as np

from hivqe.integrals import IntegralSet

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name: str) -> IntegralSet:
    from hivqe.integrals import parse_fcidump

    return parse_fcidump((FIXTURES / f"{name}.fcidump").read_text())


@lru_cache(maxsize=1)
def load_reference() -> dict:
    return json.loads((FIXTURES / "reference.json").read_text())


def random_integral_set(n_orb, n_alpha, n_beta, seed, e_core=0.0) -> IntegralSet:
    """Random symmetric integrals; one draw per canonical two-body key."""
    rng = np.random.default_rng(seed)
    one = {(p, q): rng.normal() for p in range(n_orb) for q in range(p + 1)}
    two = {}
    for p in range(n_orb):
        for q in range(p + 1):
            for r in range(p + 1):
                for s in range(r + 1):
                    if (p, q) >= (r, s):
                        two[(p, q, r, s)] = rng.normal()
    return IntegralSet.from_terms(n_orb, n_alpha, n_beta, e_core, one, two)


# ---------------------------------------------------------------------------
# Independent Jordan-Wigner construction (numpy kron only)
# ---------------------------------------------------------------------------

_Z = np.diag([1.0, -1.0])
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|, annihilates bit j


def jw_annihilator(n_qubits: int, j: int) -> np.ndarray:
    """Dense a_j with basis index m = sum_k b_k 2^k (bit 0 fastest)."""
    op = np.eye(1)
    for k in range(n_qubits):
        if k < j:
            factor = _Z
        elif k == j:
            factor = _LOWER
        else:
            factor = np.eye(2)
        op = np.kron(factor, op)  # higher bits go to slower kron positions
    return op


def jw_number_conserving_hamiltonian(s: IntegralSet) -> np.ndarray:
    """Fock-space H from kron-built ladder operators; alpha bits before beta."""
    n = s.n_orb
    nq = 2 * n
    ann = [jw_annihilator(nq, j) for j in range(nq)]
    cre = [a.T for a in ann]
    dim = 1 << nq
    h = np.zeros((dim, dim))
    for p in range(n):
        for q in range(n):
            if s.one_body[p, q] == 0.0:
                continue
            for off in (0, n):
                h += s.one_body[p, q] * cre[p + off] @ ann[q + off]
    from hivqe.integrals import get_eri

    for p in range(n):
        for q in range(n):
            for r in range(n):
                for t in range(n):
                    v = get_eri(s, p, q, r, t)
                    if v == 0.0:
                        continue
                    for off1 in (0, n):
                        for off2 in (0, n):
                            h += 0.5 * v * (
                                cre[p + off1] @ cre[r + off2]
                                @ ann[t + off2] @ ann[q + off1]
                            )
    return h + s.e_core * np.eye(dim)


def fock_vector(dets, amps, n_orb: int) -> np.ndarray:
    from hivqe.oracle import det_to_fock_index

    out = np.zeros(1 << (2 * n_orb))
    for d, a in zip(dets, amps):
        out[det_to_fock_index(d, n_orb)] = a
    return out
