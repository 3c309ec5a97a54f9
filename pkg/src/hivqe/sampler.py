"""Simulated symmetry-sector quantum sampler.

The ansatz is a layered brick-wall of real Givens rotations on adjacent
orbital pairs within each spin channel. Every rotation conserves particle
number per spin, so the state never leaves the symmetry sector and the
simulation cost scales with the sector size rather than 2**(2*n_orb).
Measurement noise is modeled as independent classical bit flips applied to
the sampled bitstrings, which is the only noise effect the downstream
filtering consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .determinants import Determinant, Sector, det_to_string
from .subspace import SampleBatch

__all__ = [
    "AnsatzSpec",
    "SectorState",
    "NoiseModel",
    "SectorTooLargeError",
    "sector_size",
    "enumerate_sector",
    "brick_wall_ansatz",
    "prepare_state",
    "mean_occupations",
    "sample",
]

MAX_ENUMERATED = 5_000_000


class SectorTooLargeError(RuntimeError):
    def __init__(self, count: int, limit: int):
        super().__init__(
            f"sector holds {count} determinants, beyond the enumeration limit {limit}"
        )
        self.count = count


def sector_size(n_orb: int, n_alpha: int, n_beta: int) -> int:
    """Exact sector dimension C(n_orb, n_alpha) * C(n_orb, n_beta)."""
    return math.comb(n_orb, n_alpha) * math.comb(n_orb, n_beta)


def _masks_with_popcount(n_orb: int, k: int) -> list[int]:
    # Gosper's hack walks all k-bit masks in ascending numeric order.
    if k == 0:
        return [0]
    masks = []
    m = (1 << k) - 1
    limit = 1 << n_orb
    while m < limit:
        masks.append(m)
        low = m & -m
        ripple = m + low
        m = ripple | (((m ^ ripple) >> 2) // low)
    return masks


def enumerate_sector(
    n_orb: int, n_alpha: int, n_beta: int, max_states: int = MAX_ENUMERATED
) -> list[Determinant]:
    """All sector determinants, lexicographic by (alpha_mask, beta_mask)."""
    if not (0 <= n_alpha <= n_orb and 0 <= n_beta <= n_orb):
        raise ValueError(
            f"cannot place ({n_alpha}a,{n_beta}b) electrons in {n_orb} orbitals"
        )
    count = sector_size(n_orb, n_alpha, n_beta)
    if count > max_states:
        raise SectorTooLargeError(count, max_states)
    alphas = _masks_with_popcount(n_orb, n_alpha)
    betas = _masks_with_popcount(n_orb, n_beta)
    return [Determinant(a, b) for a in alphas for b in betas]


@lru_cache(maxsize=8)
def _sector_dets(sector: Sector) -> tuple:
    return tuple(enumerate_sector(sector.n_orb, sector.n_alpha, sector.n_beta))


@lru_cache(maxsize=8)
def _sector_index(sector: Sector) -> dict:
    return {d: i for i, d in enumerate(_sector_dets(sector))}


@lru_cache(maxsize=8)
def _sector_bits(sector: Sector) -> np.ndarray:
    """(size, 2*n_orb) occupation matrix; column order matches bitstrings."""
    dets = _sector_dets(sector)
    n = sector.n_orb
    alphas = np.array([d.alpha_mask for d in dets], dtype=np.int64)
    betas = np.array([d.beta_mask for d in dets], dtype=np.int64)
    orbs = np.arange(n, dtype=np.int64)
    bits_a = (alphas[:, None] >> orbs) & 1
    bits_b = (betas[:, None] >> orbs) & 1
    return np.concatenate([bits_a, bits_b], axis=1).astype(np.uint8)


@dataclass(frozen=True)
class AnsatzSpec:
    """Ordered Givens-rotation plan; one parameter per rotation."""

    n_orb: int
    n_layers: int
    rotations: tuple  # of (channel, p, q) with channel in {"alpha", "beta"}, p < q

    def __post_init__(self):
        for channel, p, q in self.rotations:
            if channel not in ("alpha", "beta"):
                raise ValueError(f"unknown spin channel {channel!r}")
            if not (0 <= p < q < self.n_orb):
                raise ValueError(f"orbital pair ({p},{q}) out of range")

    @property
    def n_params(self) -> int:
        return len(self.rotations)


def brick_wall_ansatz(n_orb: int, n_layers: int = 2) -> AnsatzSpec:
    """Alternating even/odd adjacent-pair layers, both spin channels."""
    plan = []
    for layer in range(n_layers):
        for p in range(layer % 2, n_orb - 1, 2):
            plan.append(("alpha", p, p + 1))
            plan.append(("beta", p, p + 1))
    return AnsatzSpec(n_orb, n_layers, tuple(plan))


@dataclass(frozen=True)
class SectorState:
    """Amplitudes over the lexicographically enumerated sector.

    Real-valued: the rotation generators are real antisymmetric, so a real
    start vector stays real.
    """

    amplitudes: np.ndarray
    sector: Sector

    def __post_init__(self):
        norm_sq = float(np.sum(self.amplitudes**2))
        if abs(norm_sq - 1.0) > 1e-12:
            raise ValueError(f"state norm^2 {norm_sq} deviates from 1")


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-bit readout flip probability."""

    p_flip: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_flip <= 1.0:
            raise ValueError("p_flip must lie in [0, 1]")


@lru_cache(maxsize=256)
def _rotation_plan(sector: Sector, channel: str, p: int, q: int):
    """Index pairs and fermionic signs for one Givens rotation on a sector.

    Returns (i_idx, j_idx, signs): rows where orbital p is occupied and q
    empty in the channel, their partners with the occupation swapped, and
    the sign (-1)**(occupied orbitals strictly between p and q).
    """
    dets = _sector_dets(sector)
    index = _sector_index(sector)
    between_window = ((1 << q) - 1) & ~((1 << (p + 1)) - 1)
    i_idx, j_idx, signs = [], [], []
    for i, d in enumerate(dets):
        mask = d.alpha_mask if channel == "alpha" else d.beta_mask
        if (mask >> p) & 1 and not (mask >> q) & 1:
            swapped = mask ^ (1 << p) ^ (1 << q)
            partner = (
                Determinant(swapped, d.beta_mask)
                if channel == "alpha"
                else Determinant(d.alpha_mask, swapped)
            )
            i_idx.append(i)
            j_idx.append(index[partner])
            signs.append(-1.0 if (mask & between_window).bit_count() & 1 else 1.0)
    return (
        np.array(i_idx, dtype=np.int64),
        np.array(j_idx, dtype=np.int64),
        np.array(signs),
    )


def prepare_state(spec: AnsatzSpec, theta, sector: Sector) -> SectorState:
    """Apply the rotation plan to the Hartree-Fock reference.

    Each rotation G(theta_k) acts on the two-determinant subspaces that
    differ only by moving one electron between its orbital pair, under the
    half-angle convention: the p-occupied amplitude maps to
    cos(t/2)*a_p - s*sin(t/2)*a_q with s the crossing sign.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_params,):
        raise ValueError(
            f"expected {spec.n_params} parameters, got shape {theta.shape}"
        )
    if spec.n_orb != sector.n_orb:
        raise ValueError("ansatz and sector orbital counts differ")
    index = _sector_index(sector)
    hf = Determinant((1 << sector.n_alpha) - 1, (1 << sector.n_beta) - 1)
    amps = np.zeros(len(index))
    amps[index[hf]] = 1.0
    for (channel, p, q), angle in zip(spec.rotations, theta):
        i_idx, j_idx, signs = _rotation_plan(sector, channel, p, q)
        if len(i_idx) == 0:
            continue
        c = math.cos(0.5 * angle)
        s = math.sin(0.5 * angle)
        a_p = amps[i_idx].copy()
        a_q = amps[j_idx]
        amps[i_idx] = c * a_p - signs * s * a_q
        amps[j_idx] = signs * s * a_p + c * a_q
    return SectorState(amps, sector)


def mean_occupations(state: SectorState):
    """Per-orbital mean occupation (alpha array, beta array) of the state."""
    n = state.sector.n_orb
    probs = state.amplitudes**2
    occ = probs @ _sector_bits(state.sector)
    return occ[:n], occ[n:]


def _raw_bitstring(d: Determinant, n_orb: int) -> str:
    return det_to_string(d, n_orb).replace("|", "")


def sample(state: SectorState, shots: int, noise: NoiseModel, seed) -> SampleBatch:
    """Draw shots i.i.d. from |amplitude|^2 and apply readout flips.

    Deterministic for a fixed seed (accepts anything numpy's default_rng
    does). Keys of the returned batch are raw 2*n_orb bitstrings.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    probs = state.amplitudes**2
    probs = probs / probs.sum()
    drawn = rng.choice(len(probs), size=shots, p=probs)
    n_orb = state.sector.n_orb
    dets = _sector_dets(state.sector)
    width = 2 * n_orb

    if noise.p_flip == 0.0:
        uniq, counts = np.unique(drawn, return_counts=True)
        table = {
            _raw_bitstring(dets[i], n_orb): int(c) for i, c in zip(uniq, counts)
        }
        return SampleBatch(table, shots, n_orb)

    bits = _sector_bits(state.sector)[drawn].copy()
    flips = rng.random((shots, width)) < noise.p_flip
    bits ^= flips.astype(np.uint8)
    text = (bits + ord("0")).astype(np.uint8).tobytes().decode("ascii")
    table: dict[str, int] = {}
    for i in range(shots):
        key = text[i * width:(i + 1) * width]
        table[key] = table.get(key, 0) + 1
    return SampleBatch(table, shots, n_orb)
