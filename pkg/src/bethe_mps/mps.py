"""Exact open-boundary MPS for six-vertex Bethe states.

The Bethe state B(l_1)...B(l_n)|omega> has amplitudes

    <x_1..x_n|state> = Tr[ D^(x_1-1) C D^(x_2-x_1-1) C ... C D^(L-x_n) Q_n ]

with site-independent ``D_n = <up|L_i|up>`` and ``C_n = <down|L_i|up>``
acting on n doubled auxiliary pairs, and a rank-1 nilpotent boundary matrix
``Q_n``. Auxiliary pairs are ordered newest-first: the pair for l_n is the
leftmost Kronecker factor, l_1 the rightmost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ContractViolation, SizeLimitError
from .kernel import ModelKernel, weights
from .linalg import MAX_DIM, kron, kron_all
from .states import SectorBasis, SpinConfiguration, StateVector

MAX_TENSOR_N = 5
MAX_STATE_N = 4
MAX_STATE_L = 16

# |down><up| on a single auxiliary space
Q_SINGLE = np.array([[0, 0], [1, 0]], dtype=np.complex128)
Q_TILDE = np.array(
    [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]],
    dtype=np.complex128,
)


@dataclass(frozen=True)
class BoundaryTensors:
    q_single: np.ndarray
    q_tilde: np.ndarray
    q_script: np.ndarray
    q_n: np.ndarray
    n: int
    # q_n == outer(ket, bra)
    ket: np.ndarray
    bra: np.ndarray


def build_boundary(n: int, max_n: int = MAX_TENSOR_N) -> BoundaryTensors:
    """Boundary matrices for ``n`` flipped spins.

    ``q_script = q_tilde @ (q_single (x) I_2)`` has rank one,
    ``q_script = |e_1 + e_4><e_2|`` (1-based), and squares to zero;
    ``q_n`` is its n-fold Kronecker power.
    """
    if n < 0:
        raise ContractViolation(f"n must be non-negative, got {n}")
    if n > max_n:
        raise SizeLimitError(f"boundary for n={n} exceeds cap n<={max_n}")
    q_script = Q_TILDE @ np.kron(Q_SINGLE, np.eye(2))
    ket1 = np.array([1, 0, 0, 1], dtype=np.complex128)
    bra1 = np.array([0, 1, 0, 0], dtype=np.complex128)
    ket = np.ones(1, dtype=np.complex128)
    bra = np.ones(1, dtype=np.complex128)
    for _ in range(n):
        ket = np.kron(ket1, ket)
        bra = np.kron(bra1, bra)
    q_n = kron_all([q_script] * n)
    return BoundaryTensors(Q_SINGLE.copy(), Q_TILDE.copy(), q_script, q_n, n, ket, bra)


def recursion_kernels(b: complex, c: complex) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The four 4x4 matrices (K_D1, K_D2, K_C1, K_C2) of the D/C recursion.

    D_{m+1} = K_D1 (x) D_m + K_D2 (x) C_m
    C_{m+1} = K_C1 (x) C_m + K_C2 (x) D_m
    """
    kd1 = np.array([[1, 0, 0, 0], [0, b, 0, 0], [0, 0, b, 0], [c * c, 0, 0, b * b]], dtype=np.complex128)
    kd2 = np.array([[0, c, 0, 0], [0, 0, 0, 0], [b * c, 0, 0, b * c], [0, c, 0, 0]], dtype=np.complex128)
    kc1 = np.array([[b * b, 0, 0, c * c], [0, b, 0, 0], [0, 0, b, 0], [0, 0, 0, 1]], dtype=np.complex128)
    kc2 = np.array([[0, 0, c, 0], [b * c, 0, 0, b * c], [0, 0, 0, 0], [0, 0, c, 0]], dtype=np.complex128)
    return kd1, kd2, kc1, kc2


@dataclass(frozen=True)
class MpsTensors:
    d_n: np.ndarray
    c_n: np.ndarray
    lambdas: tuple[complex, ...]
    kernel: ModelKernel

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @property
    def bond_dim(self) -> int:
        return self.d_n.shape[0]


def build_site_tensors(k: ModelKernel, lambdas: Sequence[complex], max_n: int = MAX_TENSOR_N) -> MpsTensors:
    """D_n, C_n by recursion from D_0 = [1], C_0 = [0], one rapidity at a time."""
    lambdas = tuple(complex(x) for x in lambdas)
    if len(lambdas) > max_n:
        raise SizeLimitError(f"site tensors for n={len(lambdas)} exceed cap n<={max_n}")
    d = np.ones((1, 1), dtype=np.complex128)
    c = np.zeros((1, 1), dtype=np.complex128)
    for lam in lambdas:
        w = weights(k, lam)
        kd1, kd2, kc1, kc2 = recursion_kernels(w.b, w.c)
        d, c = kron(kd1, d) + kron(kd2, c), kron(kc1, c) + kron(kc2, d)
    return MpsTensors(d, c, lambdas, k)


def _check(t: MpsTensors, n: int) -> None:
    if t.n != n:
        raise ContractViolation(f"configuration has {n} down spins, tensors built for n={t.n}")


def amplitude_dense(t: MpsTensors, boundary: BoundaryTensors | np.ndarray, cfg: SpinConfiguration) -> complex:
    """Reference path: full matrix product, then the trace against the boundary."""
    _check(t, cfg.n)
    q = boundary.q_n if isinstance(boundary, BoundaryTensors) else np.asarray(boundary)
    m = np.eye(t.bond_dim, dtype=np.complex128)
    down = set(cfg.positions)
    for site in range(1, cfg.chain_length + 1):
        m = m @ (t.c_n if site in down else t.d_n)
    return complex(np.trace(m @ q))


def amplitude(t: MpsTensors, boundary: BoundaryTensors | np.ndarray, cfg: SpinConfiguration) -> complex:
    """Trace-formula amplitude of one spin configuration.

    With :class:`BoundaryTensors` the rank-1 form ``Q_n = |ket><bra|`` turns
    the trace into ``<bra| A_1 ... A_L |ket>`` evaluated as L vector-matrix
    products (cost ``O(L 16^n)``). Any other boundary matrix falls back to
    :func:`amplitude_dense`.
    """
    if not isinstance(boundary, BoundaryTensors):
        return amplitude_dense(t, boundary, cfg)
    _check(t, cfg.n)
    if boundary.n != t.n:
        raise ContractViolation(f"boundary built for n={boundary.n}, tensors for n={t.n}")
    row = boundary.bra
    down = set(cfg.positions)
    for site in range(1, cfg.chain_length + 1):
        row = row @ (t.c_n if site in down else t.d_n)
    return complex(row @ boundary.ket)


def assemble_state(
    t: MpsTensors,
    boundary: BoundaryTensors | np.ndarray,
    L: int,
    max_n: int = MAX_STATE_N,
    max_L: int = MAX_STATE_L,
) -> StateVector:
    """All C(L, n) amplitudes as a sector :class:`StateVector`.

    Configurations share prefixes, so the product is accumulated depth-first
    and each prefix is multiplied once.
    """
    n = t.n
    if n > max_n or L > max_L:
        raise SizeLimitError(f"state assembly capped at n<={max_n}, L<={max_L} (got n={n}, L={L})")
    if n > L:
        raise ContractViolation(f"n={n} down spins do not fit in L={L} sites")
    if SectorBasis.size(L, n) * t.bond_dim**2 > MAX_DIM**2:
        raise SizeLimitError("state assembly work exceeds cap")
    basis = SectorBasis(L, n)
    out = np.zeros(len(basis), dtype=np.complex128)

    if isinstance(boundary, BoundaryTensors):
        if boundary.n != n:
            raise ContractViolation(f"boundary built for n={boundary.n}, tensors for n={n}")
        start = boundary.bra[None, :]

        def close(block):
            return complex((block @ boundary.ket)[0])

    else:
        q = np.asarray(boundary, dtype=np.complex128)
        if q.shape != t.d_n.shape:
            raise ContractViolation(f"boundary shape {q.shape} != bond shape {t.d_n.shape}")
        start = np.eye(t.bond_dim, dtype=np.complex128)

        def close(block):
            return complex(np.trace(block @ q))

    def walk(site: int, block: np.ndarray, downs: tuple[int, ...]):
        remaining = n - len(downs)
        if site > L:
            out[basis.index(downs)] = close(block)
            return
        if remaining > 0:
            walk(site + 1, block @ t.c_n, downs + (site,))
        if L - site + 1 > remaining:
            walk(site + 1, block @ t.d_n, downs)

    walk(1, start, ())
    return StateVector(out, L, n)


def amplitude_table(state: StateVector) -> dict[str, complex]:
    basis = state.basis()
    return {cfg.label(): complex(a) for cfg, a in zip(basis, state.amplitudes)}
