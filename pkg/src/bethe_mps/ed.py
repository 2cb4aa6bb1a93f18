"""Exact diagonalization of the open XXZ chain, per magnetization sector.

    H = sum_{i<L} [sx_i sx_{i+1} + sy_i sy_{i+1} + Delta (sz_i sz_{i+1} - 1)] - Delta
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, NullStateError, PreconditionError, SizeLimitError
from .kernel import ModelKernel
from .linalg import MAX_EIG_DIM, embed, sym_eig_real
from .states import SectorBasis, StateVector, phase_fixed

MAX_FULL_L = 12
DEGENERACY_TOL = 1e-8
MATCH_TOL = 1e-9

SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _full_hamiltonian(delta: float, L: int) -> np.ndarray:
    if L > MAX_FULL_L:
        raise SizeLimitError(f"full Hamiltonian capped at L<={MAX_FULL_L}")
    dims = (2,) * L
    dim = 2**L
    h = np.zeros((dim, dim), dtype=np.complex128)
    bond = np.kron(SX, SX) + np.kron(SY, SY) + delta * (np.kron(SZ, SZ) - np.eye(4))
    for i in range(L - 1):
        h += embed(bond, dims, (i, i + 1))
    h -= delta * np.eye(dim)
    return h


def _sector_hamiltonian(delta: float, basis: SectorBasis) -> np.ndarray:
    L = basis.chain_length
    if len(basis) > MAX_EIG_DIM:
        raise SizeLimitError(f"sector dimension {len(basis)} exceeds cap {MAX_EIG_DIM}")
    h = np.zeros((len(basis), len(basis)), dtype=np.complex128)
    for idx, cfg in enumerate(basis):
        down = set(cfg.positions)
        spins = [-1 if s in down else 1 for s in range(1, L + 1)]
        h[idx, idx] = diagonal_energy(delta, spins)
        for i in range(1, L):
            if (i in down) != (i + 1 in down):
                # sx sx + sy sy = 2 (s+ s- + s- s+): hop the flipped spin across the bond
                flipped = tuple(sorted(down ^ {i, i + 1}))
                h[basis.index(flipped), idx] += 2.0
    return h


def diagonal_energy(delta: float, spins) -> float:
    """Diagonal matrix element for a list of +-1 spin values."""
    e = -delta
    for s, t in zip(spins, spins[1:]):
        e += delta * (s * t - 1)
    return e


def build_hamiltonian(k: ModelKernel, L: int, sector: int | None = None) -> np.ndarray:
    """Dense Hamiltonian on the full space or on the ``sector``-down-spin block."""
    if L < 2:
        raise PreconditionError(f"need at least two sites, got L={L}")
    if sector is None:
        return _full_hamiltonian(k.delta, L)
    return _sector_hamiltonian(k.delta, SectorBasis(L, sector))


def diagonal_part(k: ModelKernel, L: int) -> np.ndarray:
    """Diagonal of the full Hamiltonian, built from spin bookkeeping alone."""
    if L > MAX_FULL_L:
        raise SizeLimitError(f"full Hamiltonian capped at L<={MAX_FULL_L}")
    out = np.empty(2**L)
    for idx in range(2**L):
        spins = [1 - 2 * ((idx >> (L - 1 - s)) & 1) for s in range(L)]
        out[idx] = diagonal_energy(k.delta, spins)
    return out


@dataclass
class EigenPair:
    energy: float
    vector: StateVector
    sector: tuple[int, int]


@dataclass
class MatchReport:
    overlap: float
    energy: float
    residual: float
    index: int
    degenerate: bool

    @property
    def matched(self) -> bool:
        return self.overlap >= 1 - MATCH_TOL


def diagonalize_sector(k: ModelKernel, L: int, n: int) -> list[EigenPair]:
    """Eigenpairs of the n-down-spin block, ascending in energy."""
    h = build_hamiltonian(k, L, n)
    evals, evecs = sym_eig_real(h)
    return [
        EigenPair(float(e), StateVector(evecs[:, j].astype(np.complex128), L, n), (L, n))
        for j, e in enumerate(evals)
    ]


def match_state(candidate: StateVector, pairs: list[EigenPair], hamiltonian: np.ndarray | None = None) -> MatchReport:
    """Best eigenpair for a candidate vector.

    When the best energy is degenerate (neighbours within 1e-8) the overlap is
    the norm of the projection onto the whole degenerate subspace. Without an
    explicit ``hamiltonian`` the sector matrix is rebuilt from the eigenpairs,
    which is exact for a complete set.
    """
    if not pairs:
        raise PreconditionError("no eigenpairs to match against")
    L, n = pairs[0].sector
    if candidate.n is None:
        candidate = candidate.to_sector(n)
    if (candidate.chain_length, candidate.n) != (L, n):
        raise ContractViolation(f"candidate in sector {(candidate.chain_length, candidate.n)}, pairs in {(L, n)}")
    if candidate.is_null:
        raise NullStateError("candidate state is identically zero")
    c = candidate.amplitudes / candidate.norm
    vecs = np.column_stack([p.vector.amplitudes for p in pairs])
    energies = np.array([p.energy for p in pairs])
    proj = np.abs(vecs.conj().T @ c)
    best = int(np.argmax(proj))
    group = np.flatnonzero(np.abs(energies - energies[best]) < DEGENERACY_TOL)
    degenerate = len(group) > 1
    ov = float(np.linalg.norm(proj[group])) if degenerate else float(proj[best])
    if hamiltonian is None:
        hamiltonian = (vecs * energies) @ vecs.conj().T
    e = energies[best]
    residual = float(np.linalg.norm(hamiltonian @ c - e * c))
    return MatchReport(ov, float(e), residual, best, degenerate)


def eigen_residual(h: np.ndarray, state: StateVector, e: complex) -> float:
    """||H v - E v|| / (||H|| ||v||) for a sector or full-space state."""
    v = state.amplitudes
    nv = np.linalg.norm(v)
    if nv == 0:
        raise NullStateError("zero state")
    return float(np.linalg.norm(h @ v - e * v) / (np.linalg.norm(h, 2) * nv))


def spin_flip_spectrum_gap(k: ModelKernel, L: int, n: int) -> float:
    """Max |E_n - E_{L-n}| between the sorted spectra of mirror sectors."""
    a = np.sort([p.energy for p in diagonalize_sector(k, L, n)])
    b = np.sort([p.energy for p in diagonalize_sector(k, L, L - n)])
    return float(np.max(np.abs(a - b)))


def ground_sector_vector(L: int) -> StateVector:
    return StateVector(np.ones(1, dtype=np.complex128), L, 0)


__all__ = [
    "EigenPair",
    "MatchReport",
    "SectorBasis",
    "build_hamiltonian",
    "diagonal_part",
    "diagonalize_sector",
    "eigen_residual",
    "match_state",
    "phase_fixed",
]
