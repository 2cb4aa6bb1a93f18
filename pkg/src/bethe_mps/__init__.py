"""Exact open-boundary matrix product states for Bethe states.

Covers the XXZ / XXX spin chain and the lattice Lieb-Liniger gas, with an
algebraic-Bethe-ansatz oracle and exact diagonalization to check them.
"""

__version__ = "0.1.0"

from .bethe import RapiditySet, SolverConfig, bae_residual, energy, solve_bae
from .ed import build_hamiltonian, diagonalize_sector, match_state
from .kernel import ModelKernel, make_kernel, xxx, xxz
from .mps import amplitude, assemble_state, build_boundary, build_site_tensors
from .oracle import bethe_state_oracle, run_algebra_checks
from .states import SectorBasis, SpinConfiguration, StateVector

__all__ = [
    "ModelKernel",
    "RapiditySet",
    "SectorBasis",
    "SolverConfig",
    "SpinConfiguration",
    "StateVector",
    "amplitude",
    "assemble_state",
    "bae_residual",
    "bethe_state_oracle",
    "build_boundary",
    "build_hamiltonian",
    "build_site_tensors",
    "diagonalize_sector",
    "energy",
    "make_kernel",
    "match_state",
    "run_algebra_checks",
    "solve_bae",
    "xxx",
    "xxz",
]
