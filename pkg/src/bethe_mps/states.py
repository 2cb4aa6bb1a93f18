"""State vectors and the fixed-magnetization basis shared by all modules.

Full-space convention: site 1 is the most significant bit, up = 0, down = 1.
Sector bases list down-spin position tuples (1-based) in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .exceptions import ContractViolation, NullStateError, PreconditionError


@dataclass(frozen=True)
class SpinConfiguration:
    positions: tuple[int, ...]
    chain_length: int

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise PreconditionError(f"positions must be strictly increasing: {pos}")
        if pos and (pos[0] < 1 or pos[-1] > self.chain_length):
            raise PreconditionError(f"positions {pos} out of range 1..{self.chain_length}")

    @property
    def n(self) -> int:
        return len(self.positions)

    def label(self) -> str:
        return "x=" + ",".join(str(p) for p in self.positions)

    def full_index(self) -> int:
        return sum(1 << (self.chain_length - p) for p in self.positions)


class SectorBasis:
    """Lexicographically ordered basis of the n-down-spin sector."""

    def __init__(self, chain_length: int, down_spins: int):
        if chain_length < 1 or not 0 <= down_spins <= chain_length:
            raise PreconditionError(f"invalid sector (L={chain_length}, n={down_spins})")
        self.chain_length = chain_length
        self.down_spins = down_spins
        self.states = [
            SpinConfiguration(c, chain_length) for c in combinations(range(1, chain_length + 1), down_spins)
        ]
        self.index_map = {s.positions: i for i, s in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def index(self, positions) -> int:
        return self.index_map[tuple(positions)]

    def full_indices(self) -> np.ndarray:
        return np.array([s.full_index() for s in self.states], dtype=np.int64)

    @staticmethod
    def size(chain_length: int, down_spins: int) -> int:
        return comb(chain_length, down_spins)


@dataclass
class StateVector:
    """Dense amplitudes over a sector basis or over the full 2^L space.

    ``n is None`` marks a full-space vector. ``max_modulus`` is recorded at
    construction for normalization bookkeeping.
    """

    amplitudes: np.ndarray
    chain_length: int
    n: int | None = None
    max_modulus: float = field(init=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = 2**self.chain_length if self.n is None else SectorBasis.size(self.chain_length, self.n)
        if self.amplitudes.shape != (expected,):
            raise ContractViolation(f"amplitude vector shape {self.amplitudes.shape}, expected ({expected},)")
        self.max_modulus = float(np.max(np.abs(self.amplitudes))) if expected else 0.0

    @property
    def is_null(self) -> bool:
        return self.max_modulus == 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def basis(self) -> SectorBasis:
        if self.n is None:
            raise ContractViolation("full-space vector has no sector basis")
        return SectorBasis(self.chain_length, self.n)

    def to_full(self) -> "StateVector":
        if self.n is None:
            return self
        full = np.zeros(2**self.chain_length, dtype=np.complex128)
        full[self.basis().full_indices()] = self.amplitudes
        return StateVector(full, self.chain_length)

    def to_sector(self, n: int, tol: float = 1e-14) -> "StateVector":
        """Restrict a full vector to sector ``n``; weight outside it must vanish."""
        if self.n is not None:
            if self.n != n:
                raise ContractViolation(f"vector lives in sector {self.n}, not {n}")
            return self
        idx = SectorBasis(self.chain_length, n).full_indices()
        rest = self.amplitudes.copy()
        rest[idx] = 0
        if np.max(np.abs(rest), initial=0.0) > tol * max(self.max_modulus, 1e-300):
            raise ContractViolation(f"vector has weight outside sector {n}")
        return StateVector(self.amplitudes[idx], self.chain_length, n)

    def normalized(self) -> np.ndarray:
        """Unit-norm amplitudes with the phase of the dominant entry set real positive."""
        return phase_fixed(self.amplitudes)

    def amplitude(self, positions) -> complex:
        cfg = SpinConfiguration(tuple(positions), self.chain_length)
        if self.n is None:
            return complex(self.amplitudes[cfg.full_index()])
        return complex(self.amplitudes[self.basis().index(cfg.positions)])


def phase_fixed(v, tie_tol: float = 1e-9) -> np.ndarray:
    """Normalize ``v`` and rotate its global phase.

    The reference entry is the first one whose modulus is within ``tie_tol``
    (relative) of the largest, which keeps the choice stable when several
    entries have equal modulus.
    """
    v = np.asarray(v, dtype=np.complex128)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise NullStateError("cannot normalize a zero vector")
    v = v / nrm
    mod = np.abs(v)
    ref = int(np.argmax(mod >= (1 - tie_tol) * mod.max()))
    return v * (abs(v[ref]) / v[ref])


def overlap(u, v) -> float:
    """|<u|v>| between normalized copies of two vectors."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NullStateError("overlap with a zero vector")
    return float(abs(np.vdot(u, v)) / (nu * nv))


def max_relative_difference(u, v) -> float:
    """Entrywise max |u - v| scaled by max(|u|_max, |v|_max)."""
    u = np.asarray(u)
    v = np.asarray(v)
    scale = max(np.max(np.abs(u), initial=0.0), np.max(np.abs(v), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(u - v)) / scale)
