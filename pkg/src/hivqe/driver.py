"""End-to-end iteration loop and run-level outputs.

Each iteration: sample the ansatz state, filter to the symmetry sector,
union into the cumulative subspace, cap-screen, optionally tensor-reconstruct,
tight-diagonalize (the reported energy), loose-diagonalize the iteration-only
determinants (the energy the optimizer sees), test convergence, then
amplitude-screen, classically expand, and let the optimizer update theta from
a probe pair. The best cumulative eigenpair over all iterations is returned.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .determinants import (
    Determinant,
    Sector,
    excitation_info,
    hartree_fock_det,
    occupied_orbitals,
    slater_condon,
)
from .eigensolver import CIVector, ground_state, project, _degree2_pairs
from .integrals import DipoleIntegrals, IntegralSet
from .optimizer import EnergyHistory, converged, make_optimizer, propose, update
from .sampler import NoiseModel, brick_wall_ansatz, mean_occupations, prepare_state, sample
from .subspace import (
    Subspace,
    amplitude_screen,
    bitstring_is_valid,
    cap_screen,
    classical_expand,
    filter_symmetry,
    tensor_reconstruct,
    union,
)

__all__ = [
    "RunConfig",
    "IterationRecord",
    "RunResult",
    "RunError",
    "run_hivqe",
    "compute_1rdm",
    "dipole_moment",
    "run_pes_sweep",
    "DEBYE_PER_AU",
]

DEBYE_PER_AU = 2.541746


class RunError(RuntimeError):
    """Driver-level failure; carries any iteration records produced so far."""

    def __init__(self, message: str, trace=()):
        super().__init__(message)
        self.trace = list(trace)


@dataclass
class RunConfig:
    shots: int = 1000
    k: int = 1000
    m: int = 100
    threshold: float = 1e-6
    eps: float = 1e-5
    window: int = 3
    max_iterations: int = 50
    tensor_reconstruct: bool = False
    closed_shell: bool = False
    p_flip: float = 0.0
    recovery_mode: str = "discard"
    seed: int = 0
    ansatz_layers: int = 2
    convergence_source: str = "cumulative"
    expansion_repeats: int = 1
    loose_residual: float = 1e-3
    loose_max_iter: int = 20
    stall_window: int = 10

    def validate(self, s: IntegralSet) -> None:
        if self.shots < 1:
            raise RunError("shots must be at least 1")
        if self.k < 1:
            raise RunError("k must be at least 1")
        if self.m < 0 or self.max_iterations < 0 or self.window < 1:
            raise RunError("counts must be nonnegative (window at least 1)")
        if self.threshold < 0 or self.eps <= 0:
            raise RunError("threshold must be >= 0 and eps > 0")
        if not 0.0 <= self.p_flip <= 1.0:
            raise RunError("p_flip must lie in [0, 1]")
        if self.recovery_mode not in ("discard", "recover"):
            raise RunError(f"unknown recovery mode {self.recovery_mode!r}")
        if self.convergence_source not in ("cumulative", "iteration"):
            raise RunError(f"unknown convergence source {self.convergence_source!r}")
        if self.closed_shell and s.n_alpha != s.n_beta:
            raise RunError("closed-shell reconstruction requires n_alpha == n_beta")
        if self.seed < 0:
            raise RunError("seed must be nonnegative")
        if self.ansatz_layers < 0 or self.expansion_repeats < 1 or self.stall_window < 1:
            raise RunError("invalid ansatz_layers / expansion_repeats / stall_window")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise RunError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class IterationRecord:
    iteration: int
    e_cum: float
    e_iter: float
    n_dets_sampled: int
    n_dets_valid: int
    shots_valid: int
    shots_invalid: int
    n_dets_union: int
    n_dets_cum: int
    n_dets_post_screen: int
    wall_ms_sample: float
    wall_ms_diag: float
    theta_norm: float
    e_plus: float
    e_minus: float


@dataclass
class RunResult:
    energy: Optional[float]
    e_hf: float
    e_corr: Optional[float]
    dets: list
    amplitudes: Optional[np.ndarray]
    trace: list
    dipole: Optional[np.ndarray]
    status: str
    iterations: int
    sector: Sector
    config: dict
    seed: int

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def n_dets(self) -> int:
        return len(self.dets)

    def result_dict(self) -> dict:
        """The result.json document (wall times live only in the trace)."""
        # plain floats only: numpy scalars repr as np.float64(...) downstream
        return {
            "energy": None if self.energy is None else float(self.energy),
            "e_corr": None if self.e_corr is None else float(self.e_corr),
            "e_hf": float(self.e_hf),
            "n_dets": self.n_dets,
            "converged": self.converged,
            "iterations": self.iterations,
            "dipole": None if self.dipole is None else [float(v) for v in self.dipole],
            "config": self.config,
            "seed": self.seed,
            "sector": {
                "n_orb": self.sector.n_orb,
                "n_alpha": self.sector.n_alpha,
                "n_beta": self.sector.n_beta,
            },
        }


def _stream(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, *key])


def _warm_start(prev_amp: dict, sub: Subspace) -> Optional[CIVector]:
    if not prev_amp:
        return None
    vec = np.array([prev_amp.get(d, 0.0) for d in sub.dets])
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        return None
    return CIVector(vec / norm, 0.0)


def _restrict(psi: CIVector, source: Subspace, target: Subspace) -> CIVector:
    """Realign amplitudes from one subspace to another; new entries get 0."""
    lookup = {d: psi.amplitudes[i] for i, d in enumerate(source.dets)}
    vec = np.array([lookup.get(d, 0.0) for d in target.dets])
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        vec = np.zeros(len(target.dets))
        vec[0] = 1.0
        norm = 1.0
    return CIVector(vec / norm, psi.energy)


def run_hivqe(
    cfg: RunConfig, s: IntegralSet, dipole_integrals: Optional[DipoleIntegrals] = None
) -> RunResult:
    """Run the full loop; returns the best cumulative eigenpair found.

    Raises RunError when the first iteration filters to an empty subspace
    (raise shots or enable recovery) or when tensor reconstruction blows past
    the 10*k safety cap.
    """
    cfg.validate(s)
    sector = Sector(s.n_orb, s.n_alpha, s.n_beta)
    if sector.size() == 0:
        raise RunError("symmetry sector is empty")
    hf = hartree_fock_det(s)
    e_hf = float(slater_condon(hf, hf, s) + s.e_core)
    config_echo = asdict(cfg)

    if cfg.max_iterations == 0:
        return RunResult(
            energy=None, e_hf=e_hf, e_corr=None, dets=[], amplitudes=None,
            trace=[], dipole=None, status="max_iterations", iterations=0,
            sector=sector, config=config_echo, seed=cfg.seed,
        )

    ansatz = brick_wall_ansatz(s.n_orb, cfg.ansatz_layers)
    opt = make_optimizer(
        np.zeros(ansatz.n_params), seed=_stream(cfg.seed, 3), a=0.1, c=0.1
    )
    noise = NoiseModel(cfg.p_flip)
    history = EnergyHistory()
    carried = Subspace([], sector)
    prev_amp: dict = {}
    trace: list[IterationRecord] = []
    best: Optional[tuple] = None
    best_energy_seen = math.inf
    stall_count = 0
    status = "max_iterations"

    def probe_energy(theta_probe, iteration, role):
        state = prepare_state(ansatz, theta_probe, sector)
        batch = sample(state, cfg.shots, noise, _stream(cfg.seed, iteration, role))
        hint = mean_occupations(state) if cfg.recovery_mode == "recover" else None
        dets = filter_symmetry(batch, sector, cfg.recovery_mode, hint)
        if not dets:
            return math.nan
        h = project(dets, s)
        return ground_state(
            h, "loose",
            loose_residual=cfg.loose_residual, loose_max_iter=cfg.loose_max_iter,
        ).energy

    for i in range(cfg.max_iterations):
        t0 = time.perf_counter()
        state = prepare_state(ansatz, opt.theta, sector)
        batch = sample(state, cfg.shots, noise, _stream(cfg.seed, i, 0))
        wall_sample = (time.perf_counter() - t0) * 1000.0

        hint = mean_occupations(state) if cfg.recovery_mode == "recover" else None
        iter_dets = filter_symmetry(batch, sector, cfg.recovery_mode, hint)
        shots_valid = sum(
            c for bs, c in batch.counts.items() if bitstring_is_valid(bs, sector)
        )
        if cfg.recovery_mode == "recover":
            shots_valid = batch.total_shots

        cum = union(carried, iter_dets)
        if len(cum) == 0:
            raise RunError(
                "no sector-valid configurations survived filtering; "
                "raise shots or enable recovery mode",
                trace,
            )
        capped = cap_screen(cum, cfg.k, s)
        if cfg.tensor_reconstruct:
            tensored = tensor_reconstruct(capped, cfg.closed_shell)
            if len(tensored) > 10 * cfg.k:
                raise RunError(
                    f"tensor reconstruction produced {len(tensored)} determinants, "
                    f"beyond the safety cap {10 * cfg.k}; lower k or disable it",
                    trace,
                )
        else:
            tensored = capped

        t1 = time.perf_counter()
        try:
            psi = ground_state(project(tensored, s), "tight", _warm_start(prev_amp, tensored))
        except Exception as exc:
            raise RunError(f"iteration {i}: cumulative diagonalization failed: {exc}", trace)
        e_cum = psi.energy
        if iter_dets:
            e_iter = ground_state(
                project(iter_dets, s), "loose",
                loose_residual=cfg.loose_residual, loose_max_iter=cfg.loose_max_iter,
            ).energy
        else:
            e_iter = math.nan
        wall_diag = (time.perf_counter() - t1) * 1000.0

        if best is None or e_cum < best[0]:
            best = (e_cum, psi.amplitudes.copy(), list(tensored.dets))
        if best_energy_seen - e_cum > 1e-10:
            best_energy_seen = e_cum
            stall_count = 0
        else:
            stall_count += 1

        history.append(e_cum if cfg.convergence_source == "cumulative" else e_iter)
        record = IterationRecord(
            iteration=i,
            e_cum=e_cum,
            e_iter=e_iter,
            n_dets_sampled=len(batch.counts),
            n_dets_valid=len(iter_dets),
            shots_valid=shots_valid,
            shots_invalid=batch.total_shots - shots_valid,
            n_dets_union=len(cum),
            n_dets_cum=len(tensored),
            n_dets_post_screen=len(tensored),
            wall_ms_sample=wall_sample,
            wall_ms_diag=wall_diag,
            theta_norm=float(np.linalg.norm(opt.theta)),
            e_plus=math.nan,
            e_minus=math.nan,
        )

        if converged(history, cfg.eps, cfg.window):
            status = "converged"
            trace.append(record)
            break
        if stall_count >= cfg.stall_window:
            status = "stalled"
            trace.append(record)
            break

        work = amplitude_screen(tensored, psi, cfg.threshold)
        cvec = _restrict(psi, tensored, work)
        for _ in range(cfg.expansion_repeats):
            expanded = classical_expand(work, cvec, cfg.m, s)
            if expanded is work:
                break  # every determinant has already served as a reference
            if len(expanded) != len(work):
                cvec = _restrict(cvec, work, expanded)
            work = expanded
        record.n_dets_post_screen = len(work)
        carried = work
        prev_amp = {d: psi.amplitudes[j] for j, d in enumerate(tensored.dets)}

        if i + 1 < cfg.max_iterations and ansatz.n_params > 0:
            theta_plus, theta_minus = propose(opt)
            e_plus = probe_energy(theta_plus, i, 1)
            e_minus = probe_energy(theta_minus, i, 2)
            record.e_plus = e_plus
            record.e_minus = e_minus
            if math.isfinite(e_plus) and math.isfinite(e_minus):
                update(opt, e_plus, e_minus)
        trace.append(record)

    energy, amplitudes, dets = best
    energy = float(energy)
    dipole = None
    if dipole_integrals is not None:
        final_sub = Subspace(dets, sector)
        gamma = compute_1rdm(CIVector(amplitudes, energy), final_sub)
        dipole = dipole_moment(gamma, dipole_integrals)
    return RunResult(
        energy=energy,
        e_hf=e_hf,
        e_corr=energy - e_hf,
        dets=dets,
        amplitudes=amplitudes,
        trace=trace,
        dipole=dipole,
        status=status,
        iterations=len(trace),
        sector=sector,
        config=config_echo,
        seed=cfg.seed,
    )


def compute_1rdm(c: CIVector, sub: Subspace) -> np.ndarray:
    """Spin-summed one-particle density matrix gamma_pq = <a+_p a_q> (both spins).

    Diagonal terms are occupation-weighted probabilities; off-diagonal terms
    come from determinant pairs one excitation apart, with fermionic phases.
    """
    if len(c.amplitudes) != len(sub):
        raise ValueError("amplitude vector does not match subspace length")
    n = sub.sector.n_orb
    gamma = np.zeros((n, n))
    amps = c.amplitudes
    for i, d in enumerate(sub.dets):
        w = amps[i] ** 2
        for p in occupied_orbitals(d.alpha_mask):
            gamma[p, p] += w
        for p in occupied_orbitals(d.beta_mask):
            gamma[p, p] += w
    dets = sub.dets
    for i, j in _degree2_pairs(dets):
        da, db = dets[i], dets[j]
        diff = (da.alpha_mask ^ db.alpha_mask).bit_count() + (
            da.beta_mask ^ db.beta_mask
        ).bit_count()
        if diff != 2:
            continue
        info = excitation_info(db, da)  # d_i = (p <- q) applied to d_j
        if info.alpha_holes:
            q, p = info.alpha_holes[0], info.alpha_particles[0]
        else:
            q, p = info.beta_holes[0], info.beta_particles[0]
        term = amps[i] * amps[j] * info.phase
        gamma[p, q] += term
        gamma[q, p] += term
    return gamma


def dipole_moment(gamma: np.ndarray, d: DipoleIntegrals) -> np.ndarray:
    """Dipole vector in Debye: (nuclear - electronic) per axis."""
    if gamma.shape != d.x.shape:
        raise ValueError("density and dipole integral shapes differ")
    out = np.empty(3)
    for idx, axis in enumerate("xyz"):
        electronic = float(np.sum(gamma * d.component(axis)))
        out[idx] = (d.nuclear[idx] - electronic) * DEBYE_PER_AU
    return out


def run_pes_sweep(entries, cfg: RunConfig, integrals_by_label: dict) -> list[dict]:
    """One run per geometry; all entries must share one symmetry sector.

    entries: iterable of (label, reference energy or None). Integral sets are
    supplied separately keyed by label. Returns one row dict per entry.
    """
    sectors = {
        label: (iset.n_orb, iset.n_alpha, iset.n_beta)
        for label, iset in integrals_by_label.items()
    }
    if len(set(sectors.values())) > 1:
        raise RunError(f"geometries span different sectors: {sectors}")
    rows = []
    for label, e_ref in entries:
        iset = integrals_by_label[label]
        hf = hartree_fock_det(iset)
        e_hf = float(slater_condon(hf, hf, iset) + iset.e_core)
        result = run_hivqe(cfg, iset)
        row = {
            "label": label,
            "e_hf": e_hf,
            "e_hivqe": result.energy,
            "e_ref": e_ref,
            "abs_error": None if e_ref is None else abs(result.energy - e_ref),
        }
        rows.append(row)
    return rows
