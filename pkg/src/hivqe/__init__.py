"""Selected configuration interaction driven by a simulated quantum sampler.

A parameterized, particle-conserving ansatz proposes electron configurations
by measurement; a classical eigensolver assigns their exact amplitudes inside
the sampled subspace; screening and deterministic expansion steps grow the
subspace until the ground-state energy settles. Integrals come from FCIDUMP
files; results include correlation energy and, with dipole integrals, the
molecular dipole moment.
"""

from .determinants import Determinant, Sector, hartree_fock_det, slater_condon
from .driver import RunConfig, RunResult, run_hivqe
from .eigensolver import CIVector, ground_state, project
from .integrals import IntegralSet, parse_fcidump
from .oracle import fci_ground
from .sampler import brick_wall_ansatz, enumerate_sector, prepare_state, sector_size
from .subspace import Subspace

__version__ = "0.1.0"

__all__ = [
    "Determinant",
    "Sector",
    "IntegralSet",
    "Subspace",
    "CIVector",
    "RunConfig",
    "RunResult",
    "run_hivqe",
    "fci_ground",
    "parse_fcidump",
    "hartree_fock_det",
    "slater_condon",
    "project",
    "ground_state",
    "enumerate_sector",
    "sector_size",
    "brick_wall_ansatz",
    "prepare_state",
    "__version__",
]
