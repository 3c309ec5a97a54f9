"""Subspace Hamiltonian assembly and ground-eigenpair solves.

project() builds the sparse symmetric matrix <d_i|H|d_j> + e_core over an
ordered determinant list without an all-pairs scan: determinants are bucketed
by equal alpha string (beta excitations), equal beta string (alpha
excitations) and alpha-minus-one-electron submasks (mixed double
excitations), so only degree <= 2 pairs are ever visited.

ground_state() runs a Davidson iteration with a diagonal preconditioner,
falling back to a direct dense solve below a configurable dimension.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .determinants import Determinant, slater_condon
from .integrals import IntegralSet

__all__ = [
    "SparseSubspaceHamiltonian",
    "CIVector",
    "EigensolverError",
    "project",
    "ground_state",
    "energy_of",
    "dump_matrix",
    "load_matrix",
]

DENSE_CUTOFF = 512
TIGHT_RESIDUAL = 1e-8
LOOSE_RESIDUAL = 1e-3
LOOSE_MAX_ITER = 20
TIGHT_MAX_ITER = 400
MAX_SUBSPACE = 25


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SparseSubspaceHamiltonian:
    """Row-compressed symmetric Hamiltonian over a determinant ordering."""

    matrix: scipy.sparse.csr_matrix

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


@dataclass(frozen=True)
class CIVector:
    """Normalized real amplitude vector plus its Rayleigh-quotient energy."""

    amplitudes: np.ndarray
    energy: float

    def __post_init__(self):
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"CI vector norm {norm} deviates from 1")


def _degree2_pairs(dets: Sequence[Determinant]):
    """Yield index pairs (i < j) with total excitation degree 1 or 2."""
    by_alpha: dict = {}
    by_beta: dict = {}
    for idx, d in enumerate(dets):
        by_alpha.setdefault(d.alpha_mask, []).append(idx)
        by_beta.setdefault(d.beta_mask, []).append(idx)

    # Same alpha string: any beta excitation of degree 1 or 2.
    for group in by_alpha.values():
        for a, i in enumerate(group):
            bi = dets[i].beta_mask
            for j in group[a + 1:]:
                if (bi ^ dets[j].beta_mask).bit_count() in (2, 4):
                    yield i, j
    # Same beta string: alpha excitations.
    for group in by_beta.values():
        for a, i in enumerate(group):
            ai = dets[i].alpha_mask
            for j in group[a + 1:]:
                if (ai ^ dets[j].alpha_mask).bit_count() in (2, 4):
                    yield i, j
    # Mixed double: one excitation per channel. Two determinants with alpha
    # degree exactly 1 share exactly one alpha-remove-one-electron submask,
    # so each pair is visited once.
    sub_alpha: dict = {}
    for idx, d in enumerate(dets):
        mask = d.alpha_mask
        m = mask
        while m:
            low = m & -m
            sub_alpha.setdefault(mask ^ low, []).append(idx)
            m ^= low
    for group in sub_alpha.values():
        for a, i in enumerate(group):
            di = dets[i]
            for j in group[a + 1:]:
                dj = dets[j]
                if di.alpha_mask != dj.alpha_mask and (di.beta_mask ^ dj.beta_mask).bit_count() == 2:
                    yield i, j


def project(dets: Sequence[Determinant], s: IntegralSet) -> SparseSubspaceHamiltonian:
    """Assemble <d_i|H|d_j> + e_core*I over the given determinant ordering.

    Entries beyond excitation degree 2 are structurally absent. The matrix is
    stored fully symmetric (both triangles).
    """
    n = len(dets)
    if n == 0:
        raise EigensolverError("cannot project onto an empty determinant list")
    rows, cols, vals = [], [], []
    for i, d in enumerate(dets):
        rows.append(i)
        cols.append(i)
        vals.append(slater_condon(d, d, s) + s.e_core)
    for i, j in _degree2_pairs(dets):
        v = slater_condon(dets[i], dets[j], s)
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((v, v))
    matrix = scipy.sparse.csr_matrix(
        (np.asarray(vals), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n, n),
    )
    return SparseSubspaceHamiltonian(matrix)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    lead = int(np.argmax(np.abs(vec)))
    return -vec if vec[lead] < 0 else vec


def _dense_ground(matrix) -> CIVector:
    w, v = scipy.linalg.eigh(matrix.toarray())
    vec = _fix_sign(v[:, 0])
    return CIVector(vec / np.linalg.norm(vec), float(w[0]))


def _orthonormalize(t: np.ndarray, basis: list[np.ndarray]) -> Optional[np.ndarray]:
    # Two rounds of modified Gram-Schmidt keep the basis orthogonal to
    # working precision.
    for _ in range(2):
        for b in basis:
            t = t - (b @ t) * b
    norm = np.linalg.norm(t)
    if norm < 1e-12:
        return None
    return t / norm


def _davidson(matrix, tol: float, max_iter: int, guess: Optional[np.ndarray]):
    n = matrix.shape[0]
    diag = matrix.diagonal()
    if guess is not None and np.linalg.norm(guess) > 0:
        v0 = guess / np.linalg.norm(guess)
    else:
        v0 = np.zeros(n)
        v0[int(np.argmin(diag))] = 1.0
    basis = [v0]
    products = [matrix @ v0]
    theta, x = 0.0, v0
    residual_norm = np.inf
    for _ in range(max_iter):
        m = len(basis)
        small = np.empty((m, m))
        for i in range(m):
            for j in range(i + 1):
                small[i, j] = small[j, i] = basis[i] @ products[j]
        w, vecs = scipy.linalg.eigh(small)
        theta = float(w[0])
        coeff = vecs[:, 0]
        x = sum(c * b for c, b in zip(coeff, basis))
        ax = sum(c * p for c, p in zip(coeff, products))
        residual = ax - theta * x
        residual_norm = float(np.linalg.norm(residual))
        if residual_norm <= tol:
            return theta, x, residual_norm, True
        if m >= MAX_SUBSPACE:
            basis = [x / np.linalg.norm(x)]
            products = [matrix @ basis[0]]
            continue
        denom = diag - theta
        denom = np.where(np.abs(denom) < 1e-8, np.copysign(1e-8, denom + 1e-300), denom)
        t = _orthonormalize(residual / denom, basis)
        if t is None:
            # Preconditioned residual lies in the span; deterministic escape
            # via the largest-residual coordinate direction.
            probe = np.zeros(n)
            probe[int(np.argmax(np.abs(residual)))] = 1.0
            t = _orthonormalize(probe, basis)
            if t is None:
                return theta, x, residual_norm, residual_norm <= tol
        basis.append(t)
        products.append(matrix @ t)
    return theta, x, residual_norm, residual_norm <= tol


def ground_state(
    h: SparseSubspaceHamiltonian,
    mode: str = "tight",
    guess: Optional[CIVector] = None,
    dense_cutoff: int = DENSE_CUTOFF,
    loose_residual: float = LOOSE_RESIDUAL,
    loose_max_iter: int = LOOSE_MAX_ITER,
) -> CIVector:
    """Lowest eigenpair of h.

    mode="tight" iterates Davidson to residual 1e-8 and raises on failure;
    mode="loose" stops at residual 1e-3 or 20 iterations, whichever first,
    and returns the best estimate. Dimensions <= dense_cutoff use a direct
    dense solve. The returned vector is normalized with its largest-magnitude
    amplitude positive.
    """
    if mode not in ("tight", "loose"):
        raise ValueError(f"unknown mode {mode!r}")
    n = h.dimension
    if n == 0:
        raise EigensolverError("empty Hamiltonian")
    if n <= dense_cutoff:
        return _dense_ground(h.matrix)
    guess_vec = None
    if guess is not None:
        if len(guess.amplitudes) != n:
            raise EigensolverError("guess vector length does not match dimension")
        guess_vec = np.asarray(guess.amplitudes, dtype=float)
    if mode == "tight":
        tol, max_iter = TIGHT_RESIDUAL, TIGHT_MAX_ITER
    else:
        tol, max_iter = loose_residual, loose_max_iter
    theta, x, res, ok = _davidson(h.matrix, tol, max_iter, guess_vec)
    if mode == "tight" and not ok:
        raise EigensolverError(
            f"Davidson failed to reach residual {tol:g} in {max_iter} iterations "
            f"(final residual {res:.3e})"
        )
    x = _fix_sign(x / np.linalg.norm(x))
    return CIVector(x, theta)


def energy_of(c: CIVector, h: SparseSubspaceHamiltonian) -> float:
    """Rayleigh quotient c^T H c (c is normalized by construction)."""
    if len(c.amplitudes) != h.dimension:
        raise EigensolverError("vector and matrix dimensions differ")
    return float(c.amplitudes @ (h.matrix @ c.amplitudes))


def dump_matrix(h: SparseSubspaceHamiltonian, path) -> None:
    """Write (dimension, nnz, row offsets, column indices, values), little-endian."""
    m = h.matrix
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", m.shape[0], m.nnz))
        fh.write(m.indptr.astype("<i8").tobytes())
        fh.write(m.indices.astype("<i8").tobytes())
        fh.write(m.data.astype("<f8").tobytes())


def load_matrix(path) -> SparseSubspaceHamiltonian:
    """Read back a matrix written by :func:`dump_matrix`."""
    with open(path, "rb") as fh:
        dim, nnz = struct.unpack("<qq", fh.read(16))
        indptr = np.frombuffer(fh.read(8 * (dim + 1)), dtype="<i8")
        indices = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        data = np.frombuffer(fh.read(8 * nnz), dtype="<f8")
    matrix = scipy.sparse.csr_matrix((data, indices, indptr), shape=(dim, dim))
    return SparseSubspaceHamiltonian(matrix)
