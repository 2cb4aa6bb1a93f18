"""Independent ground truth from the algebraic Bethe ansatz.

Nothing here uses the D/C recursion or the trace formula. Operators live on
the full 2^L Hilbert space (site 1 = slowest factor) and the looped monodromy
``T(l) = L_01 ... L_0L L_0L ... L_01`` is accumulated by right-multiplying
site-local L-operators onto its 2x2 auxiliary blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DegenerateRapidityError, OracleError, PreconditionError, SizeLimitError
from .kernel import ModelKernel, l_operator, r_matrix
from .linalg import embed, partial_trace, partial_transpose, relative_residual, solve_linear
from .mps import build_boundary
from .states import StateVector

MAX_ORACLE_L = 10
MAX_DENSE_CHECK_L = 6

Blocks = list  # 2x2 nested list of (2^L, 2^L) arrays


@dataclass(frozen=True)
class MonodromyBlocks:
    a_block: np.ndarray
    b_block: np.ndarray
    c_block: np.ndarray
    d_block: np.ndarray
    lam: complex
    chain_length: int

    def full(self) -> np.ndarray:
        """The monodromy as one matrix on auxiliary (x) chain."""
        return np.block([[self.a_block, self.b_block], [self.c_block, self.d_block]])


@dataclass(frozen=True)
class HalfMonodromies:
    m_blocks: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]  # E, F, G, H
    n_blocks: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]  # U, V, X, Y
    lam: complex

    def m_full(self) -> np.ndarray:
        e, f, g, h = self.m_blocks
        return np.block([[e, f], [g, h]])

    def n_full(self) -> np.ndarray:
        u, v, x, y = self.n_blocks
        return np.block([[u, v], [x, y]])


def _check_size(L: int, cap: int = MAX_ORACLE_L) -> None:
    if L < 1:
        raise PreconditionError(f"chain length must be positive, got {L}")
    if L > cap:
        raise SizeLimitError(f"dense oracle capped at L<={cap}, got L={L}")


def _right_mul_local(mat: np.ndarray, op: np.ndarray, site: int, L: int) -> np.ndarray:
    """mat @ (I (x) op_site (x) I) without forming the Kronecker product."""
    r = mat.shape[0]
    t = mat.reshape(r, 2**site, 2, 2 ** (L - site - 1))
    return np.einsum("rxqy,qp->rxpy", t, op).reshape(r, 2**L)


def _chain(blocks: Blocks, lop: np.ndarray, sites: Sequence[int], L: int) -> Blocks:
    ell = lop.reshape(2, 2, 2, 2)  # aux, phys, aux', phys'
    for s in sites:
        blocks = [
            [sum(_right_mul_local(blocks[a][c], ell[c, :, b, :], s, L) for c in range(2)) for b in range(2)]
            for a in range(2)
        ]
    return blocks


def _identity_blocks(L: int) -> Blocks:
    dim = 2**L
    eye = np.eye(dim, dtype=np.complex128)
    zero = np.zeros((dim, dim), dtype=np.complex128)
    return [[eye, zero], [zero.copy(), eye.copy()]]


def _block_mul(x: Blocks, y: Blocks) -> Blocks:
    return [[x[a][0] @ y[0][b] + x[a][1] @ y[1][b] for b in range(2)] for a in range(2)]


def looped_monodromy(k: ModelKernel, L: int, lam: complex) -> tuple[MonodromyBlocks, HalfMonodromies]:
    """Dense looped monodromy and its two halves M = L_01..L_0L, N = L_0L..L_01."""
    _check_size(L)
    lop = l_operator(k, lam)
    forward = list(range(L))
    m = _chain(_identity_blocks(L), lop, forward, L)
    t = _chain(m, lop, forward[::-1], L)
    n = _chain(_identity_blocks(L), lop, forward[::-1], L)
    mono = MonodromyBlocks(t[0][0], t[0][1], t[1][0], t[1][1], complex(lam), L)
    halves = HalfMonodromies(
        (m[0][0], m[0][1], m[1][0], m[1][1]),
        (n[0][0], n[0][1], n[1][0], n[1][1]),
        complex(lam),
    )
    return mono, halves


def b_operator(k: ModelKernel, L: int, lam: complex) -> np.ndarray:
    return looped_monodromy(k, L, lam)[0].b_block


def apply_b(k: ModelKernel, L: int, lam: complex, vec: np.ndarray) -> np.ndarray:
    """B(lam) @ vec, applying the 2L local L-operators one at a time.

    The auxiliary space starts in |down> and is projected on <up| at the end.
    """
    lop = l_operator(k, lam).reshape(2, 2, 2, 2)
    x = np.zeros((2,) + (2,) * L, dtype=np.complex128)
    x[1] = np.asarray(vec, dtype=np.complex128).reshape((2,) * L)
    # rightmost factor of T acts first: sites 1..L of N, then L..1 of M
    for s in list(range(L)) + list(range(L - 1, -1, -1)):
        x = np.tensordot(lop, x, axes=([2, 3], [0, 1 + s]))  # -> (a, p, rest...)
        x = np.moveaxis(x, 1, 1 + s)
    return x[0].reshape(2**L)


def reference_state(L: int) -> np.ndarray:
    v = np.zeros(2**L, dtype=np.complex128)
    v[0] = 1.0
    return v


def bethe_state_oracle(k: ModelKernel, L: int, lambdas: Sequence[complex], max_L: int = 16) -> StateVector:
    """B(l_1) ... B(l_n)|omega> as a full-space vector."""
    _check_size(L, max_L)
    v = reference_state(L)
    for lam in reversed(list(lambdas)):
        v = apply_b(k, L, complex(lam), v)
    return StateVector(v, L)


def transfer_matrix(k: ModelKernel, L: int, lam: complex) -> np.ndarray:
    mono, _ = looped_monodromy(k, L, lam)
    return mono.a_block + mono.d_block


def hamiltonian_from_transfer(k: ModelKernel, L: int, fd_step: float = 1e-5) -> np.ndarray:
    """sh(eta) * t(eta/2)^-1 * dt/dlambda(eta/2), central difference."""
    if not 1e-7 <= fd_step <= 1e-4:
        raise PreconditionError(f"fd_step {fd_step} outside [1e-7, 1e-4]")
    x0 = k.eta / 2
    t0 = transfer_matrix(k, L, x0)
    dt = (transfer_matrix(k, L, x0 + fd_step) - transfer_matrix(k, L, x0 - fd_step)) / (2 * fd_step)
    try:
        return k.sh(k.eta) * solve_linear(t0, dt)
    except Exception as exc:
        raise OracleError(f"t(eta/2) is numerically singular: {exc}") from exc


def spectrum_shift(h_a: np.ndarray, h_b: np.ndarray) -> tuple[float, float]:
    """Compare two spectra after sorting by real part.

    Returns ``(max_deviation, uniform_shift)`` where the shift is the mean
    difference and the deviation is measured after removing it.
    """
    ea = np.sort_complex(np.linalg.eigvals(h_a))
    eb = np.sort_complex(np.linalg.eigvals(h_b))
    diff = ea - eb
    shift = complex(np.mean(diff))
    return float(np.max(np.abs(diff - shift))), float(shift.real)


def single_site_tensors(k: ModelKernel, lambdas: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    """<up|L_i|up> and <down|L_i|up> from the explicit product of 2n L-operators.

    L_i = [L_nbar,i L^t_nund,i] ... [L_1bar,i L^t_1und,i] on the factors
    (nbar, nund, ..., 1bar, 1und, phys).
    """
    n = len(lambdas)
    dims = (2,) * (2 * n + 1)
    phys = 2 * n
    op = np.eye(2 ** (2 * n + 1), dtype=np.complex128)
    for j, lam in enumerate(lambdas):  # j = 0 is lambda_1, rightmost pair
        lop = l_operator(k, lam)
        bar, und = 2 * (n - 1 - j), 2 * (n - 1 - j) + 1
        pair = embed(lop, dims, (bar, phys)) @ embed(partial_transpose(lop, (2, 2), 0), dims, (und, phys))
        op = pair @ op
    t = op.reshape(4**n, 2, 4**n, 2)
    return t[:, 0, :, 0].copy(), t[:, 1, :, 0].copy()


@dataclass
class CheckReport:
    residuals: dict[str, float]
    samples: int
    seed: int
    chain_length: int
    kernel: str
    points: list[tuple[complex, complex]] = field(default_factory=list, repr=False)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_residual <= tol


def sample_rapidities(rng: np.random.Generator, k: ModelKernel, count: int) -> list[complex]:
    """Uniform u + iv with u in [-1, 1], v in [-1.5, 1.5], skipping pole-guard hits."""
    out: list[complex] = []
    while len(out) < count:
        lam = complex(rng.uniform(-1, 1), rng.uniform(-1.5, 1.5))
        try:
            l_operator(k, lam)
        except DegenerateRapidityError:
            continue
        out.append(lam)
    return out


def yang_baxter_residual(k: ModelKernel, lam: complex, mu: complex) -> float:
    dims = (2, 2, 2)
    r = embed(r_matrix(k, lam - mu), dims, (0, 1))
    la = embed(l_operator(k, lam), dims, (0, 2))
    lb = embed(l_operator(k, mu), dims, (1, 2))
    return relative_residual(r @ la @ lb, lb @ la @ r)


def reflection_residual(k: ModelKernel, L: int, lam: complex, mu: complex) -> float:
    _check_size(L, MAX_DENSE_CHECK_L)
    dims = (2, 2, 2**L)
    ta = embed(looped_monodromy(k, L, lam)[0].full(), dims, (0, 2))
    tb = embed(looped_monodromy(k, L, mu)[0].full(), dims, (1, 2))
    r_minus = embed(r_matrix(k, lam - mu), dims, (0, 1))
    r_plus = embed(r_matrix(k, lam + mu - k.eta), dims, (0, 1))
    return relative_residual(r_minus @ ta @ r_plus @ tb, tb @ r_plus @ ta @ r_minus)


def transfer_commutation_residual(k: ModelKernel, L: int, lam: complex, mu: complex) -> float:
    tl = transfer_matrix(k, L, lam)
    tm = transfer_matrix(k, L, mu)
    scale = np.max(np.abs(tl)) * np.max(np.abs(tm))
    return float(np.max(np.abs(tl @ tm - tm @ tl)) / scale)


def b_commutation_residual(k: ModelKernel, L: int, lam: complex, mu: complex) -> float:
    bl = b_operator(k, L, lam)
    bm = b_operator(k, L, mu)
    return relative_residual(bl @ bm, bm @ bl)


def q_tilde_residual(k: ModelKernel, L: int, lam: complex) -> float:
    """Tr_bar(Q M N) against Tr_{bar,und}(M_bar N_und^{t_und} Qscript)."""
    _check_size(L, MAX_DENSE_CHECK_L)
    _, halves = looped_monodromy(k, L, lam)
    e, f, _, _ = halves.m_blocks
    _, v, _, y = halves.n_blocks
    lhs = e @ v + f @ y  # (M N)_{up,down}
    dims = (2, 2, 2**L)
    m_bar = embed(halves.m_full(), dims, (0, 2))
    n_und = embed(halves.n_full(), dims, (1, 2))
    n_und_t = partial_transpose(n_und, dims, 1)
    q = embed(build_boundary(1).q_script, dims, (0, 1))
    rhs = partial_trace(m_bar @ n_und_t @ q, dims, (0, 1))
    return relative_residual(lhs, rhs)


def run_algebra_checks(k: ModelKernel, L: int, samples: int = 10, seed: int = 42) -> CheckReport:
    """Max relative residuals of the integrability identities over seeded samples.

    Identities: Yang-Baxter intertwining of L-operators, the reflection
    relation of the looped monodromy, commutation of transfer matrices,
    commutation of B-operators, and the doubled-auxiliary rewriting of
    ``Tr(Q M N)``. Residuals are ``max|lhs - rhs| / max(|lhs|, |rhs|)``
    (transfer commutation uses ``||t(l)|| ||t(m)||`` as the scale).
    """
    _check_size(L, MAX_DENSE_CHECK_L)
    rng = np.random.default_rng(seed)
    names = ("yang_baxter", "reflection", "transfer_commutation", "b_commutation", "q_tilde_identity")
    res = {name: 0.0 for name in names}
    points = []
    for _ in range(samples):
        lam, mu = sample_rapidities(rng, k, 2)
        points.append((lam, mu))
        res["yang_baxter"] = max(res["yang_baxter"], yang_baxter_residual(k, lam, mu))
        res["reflection"] = max(res["reflection"], reflection_residual(k, L, lam, mu))
        res["transfer_commutation"] = max(res["transfer_commutation"], transfer_commutation_residual(k, L, lam, mu))
        res["b_commutation"] = max(res["b_commutation"], b_commutation_residual(k, L, lam, mu))
        res["q_tilde_identity"] = max(res["q_tilde_identity"], q_tilde_residual(k, L, lam))
    return CheckReport(res, samples, seed, L, k.describe(), points)
