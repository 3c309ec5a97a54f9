"""Gradient-free parameter updates and outer-loop convergence detection.

Simultaneous-perturbation stochastic approximation: each step probes the
energy at theta +/- c_k*Delta for a random sign vector Delta and moves theta
against the resulting two-point gradient estimate. Two energy evaluations per
step regardless of the parameter count, which matters when every evaluation
costs a sampling round plus a diagonalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "OptimizerState",
    "EnergyHistory",
    "make_optimizer",
    "propose",
    "update",
    "converged",
]

ALPHA_EXPONENT = 0.602
GAMMA_EXPONENT = 0.101


@dataclass
class OptimizerState:
    """Mutable SPSA state; single-owner, advanced by propose/update pairs."""

    theta: np.ndarray
    step: int
    a: float
    c: float
    stability: float
    best_theta: np.ndarray
    best_energy: float
    rng: np.random.Generator
    pending: Optional[tuple] = field(default=None, repr=False)


def make_optimizer(theta0, seed=0, a: float = 0.1, c: float = 0.1,
                   stability: float = 10.0) -> OptimizerState:
    theta0 = np.asarray(theta0, dtype=float).copy()
    return OptimizerState(
        theta=theta0,
        step=0,
        a=a,
        c=c,
        stability=stability,
        best_theta=theta0.copy(),
        best_energy=np.inf,
        rng=np.random.default_rng(seed),
    )


def propose(state: OptimizerState):
    """Probe pair (theta + c_k*Delta, theta - c_k*Delta), Delta in {-1,+1}^n.

    c_k = c / (k+1)^0.101. Deterministic given the state's seed and step; a
    repeated call before update() simply redraws the pending perturbation.
    """
    c_k = state.c / (state.step + 1) ** GAMMA_EXPONENT
    delta = state.rng.integers(0, 2, size=state.theta.shape[0]) * 2.0 - 1.0
    state.pending = (delta, c_k)
    return state.theta + c_k * delta, state.theta - c_k * delta


def update(state: OptimizerState, e_plus: float, e_minus: float) -> OptimizerState:
    """Consume probe energies: theta -= a_k * (e+ - e-) / (2 c_k) * Delta.

    a_k = a / (k+1+stability)^0.602. Tracks the best probe energy seen.
    """
    if state.pending is None:
        raise RuntimeError("update called without a pending probe pair")
    delta, c_k = state.pending
    a_k = state.a / (state.step + 1 + state.stability) ** ALPHA_EXPONENT
    gradient = (e_plus - e_minus) / (2.0 * c_k) * delta
    if e_plus < state.best_energy:
        state.best_energy = e_plus
        state.best_theta = state.theta + c_k * delta
    if e_minus < state.best_energy:
        state.best_energy = e_minus
        state.best_theta = state.theta - c_k * delta
    state.theta = state.theta - a_k * gradient
    state.step += 1
    state.pending = None
    return state


@dataclass
class EnergyHistory:
    """Append-only record of per-iteration energies (Hartree)."""

    energies: list = field(default_factory=list)

    def append(self, e: float) -> None:
        self.energies.append(float(e))

    def __len__(self):
        return len(self.energies)


def converged(history, eps: float = 1e-5, window: int = 3) -> bool:
    """Has the energy settled? True iff at least window+1 energies exist and
    the max-min spread of the last `window` of them is below eps.

    Requiring one extra entry beyond the window means the examined values are
    genuine steps from an earlier iterate, not just the initial point.
    """
    energies = history.energies if isinstance(history, EnergyHistory) else list(history)
    if len(energies) < window + 1:
        return False
    tail = energies[-window:]
    return (max(tail) - min(tail)) < eps
