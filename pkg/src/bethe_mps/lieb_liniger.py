"""Lattice-regularized Lieb-Liniger gas with open boundaries.

Each site carries a bosonic Fock space truncated to occupations
``0 .. local_dim-1``. Operators on auxiliary (x) Fock use the auxiliary space
as the slow Kronecker factor, so ``L.reshape(2, d, 2, d)[a, p, b, q]`` is
``<a, p| L |b, q>``.

The MPS tensors ``C_{n,m}`` act on n doubled auxiliary pairs (newest pair on
the left, as in :mod:`bethe_mps.mps`) and share the boundary ``Q_n`` with the
spin chain.
"""

from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bethe import COINCIDENCE_TOL, SolverConfig, check_distinct
from .exceptions import (
    ContractViolation,
    DegenerateRapidityError,
    DomainEscapeError,
    PreconditionError,
    SingularMatrixError,
    SizeLimitError,
    SolverError,
)
from .linalg import MAX_DIM, kron, solve_linear
from .mps import MAX_TENSOR_N, build_boundary

REAL_TOL = 1e-9
MAX_LL_N = 3
MAX_FOCK_DIM = 2**15

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class LLParams:
    kappa: float
    spacing: float
    sites: int

    def __post_init__(self):
        if not self.kappa > 0:
            raise PreconditionError(f"kappa must be positive (repulsive), got {self.kappa}")
        if not self.spacing > 0:
            raise PreconditionError(f"lattice spacing must be positive, got {self.spacing}")
        if self.sites < 1:
            raise PreconditionError(f"need at least one site, got {self.sites}")
        if self.kappa * self.spacing >= 4:
            warnings.warn(f"kappa*a = {self.kappa * self.spacing:g} >= 4 is outside the recommended range", stacklevel=2)

    @property
    def length(self) -> float:
        return self.sites * self.spacing

    @property
    def ka(self) -> float:
        return self.kappa * self.spacing


def _fock_ops(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated (psi^dag, psi, number) on occupations 0..d-1."""
    up = np.diag(np.sqrt(np.arange(1, d, dtype=float)), -1).astype(np.complex128)
    return up, up.T.copy(), np.diag(np.arange(d, dtype=float)).astype(np.complex128)


def ll_l_operator(p: LLParams, lam: complex, local_dim: int) -> np.ndarray:
    """L-operator on auxiliary (x) Fock, shape (2d, 2d)."""
    if local_dim < 1:
        raise PreconditionError(f"local_dim must be >= 1, got {local_dim}")
    d = local_dim
    a = p.spacing
    up, dn, num = _fock_ops(d)
    rho = np.diag(np.sqrt(1 + p.ka / 4 * np.arange(d))).astype(np.complex128)
    eye = np.eye(d, dtype=np.complex128)
    s = math.sqrt(p.ka)
    return np.block(
        [
            [(1 - 1j * lam * a / 2) * eye + p.ka / 2 * num, -1j * s * up @ rho],
            [1j * s * rho @ dn, (1 + 1j * lam * a / 2) * eye + p.ka / 2 * num],
        ]
    )


def aux_transpose(m: np.ndarray, local_dim: int) -> np.ndarray:
    d = local_dim
    return m.reshape(2, d, 2, d).transpose(2, 1, 0, 3).reshape(2 * d, 2 * d)


def sy_conjugate(m: np.ndarray, local_dim: int) -> np.ndarray:
    s = np.kron(SIGMA_Y, np.eye(local_dim))
    return s @ m @ s


def ll_r_matrix(p: LLParams, lam: complex) -> np.ndarray:
    den = lam - 1j * p.kappa
    if abs(den) < 1e-12:
        raise DegenerateRapidityError(f"R-matrix pole at lambda={lam!r}")
    r = np.eye(4, dtype=np.complex128)
    r[1, 1] = r[2, 2] = lam / den
    r[1, 2] = r[2, 1] = -1j * p.kappa / den
    return r


def _retained(local_dim: int, aux: int = 2) -> list[int]:
    """Indices of aux (x) Fock basis states with occupation <= local_dim-2."""
    return [q * local_dim + m for q in range(aux) for m in range(local_dim - 1)]


def quantum_determinant(p: LLParams, mu: complex) -> complex:
    a = p.spacing
    return a * a / 4 * (mu - 1j * p.kappa / 2 + 2j / a) * (mu + 1j * p.kappa / 2 - 2j / a)


def ll_quantum_determinant_check(p: LLParams, mu: complex, local_dim: int) -> float:
    """Max deviation of L(mu-ik/2) sy L^t(mu+ik/2) sy from det_q(mu) I on retained levels."""
    d = local_dim
    k2 = 1j * p.kappa / 2
    x = ll_l_operator(p, mu - k2, d) @ sy_conjugate(aux_transpose(ll_l_operator(p, mu + k2, d), d), d)
    keep = _retained(d)
    dev = x - quantum_determinant(p, mu) * np.eye(2 * d)
    return float(np.max(np.abs(dev[np.ix_(keep, keep)])))


def ll_l_inverse(p: LLParams, mu: complex, local_dim: int) -> np.ndarray:
    a = p.spacing
    pref = 4 / (a * a * (mu + 2j / a) * (mu + 1j * p.kappa - 2j / a))
    d = local_dim
    return pref * sy_conjugate(aux_transpose(ll_l_operator(p, mu + 1j * p.kappa, d), d), d)


def ll_inverse_check(p: LLParams, mu: complex, local_dim: int) -> float:
    d = local_dim
    dev = ll_l_operator(p, mu, d) @ ll_l_inverse(p, mu, d) - np.eye(2 * d)
    keep = _retained(d)
    return float(np.max(np.abs(dev[np.ix_(keep, keep)])))


def ll_yang_baxter_check(p: LLParams, lam: complex, mu: complex, local_dim: int) -> float:
    """R_ab(l-m) L_a(l) L_b(m) = L_b(m) L_a(l) R_ab(l-m) on retained Fock levels."""
    d = local_dim
    la = np.einsum("apbq,cs->acpbsq", ll_l_operator(p, lam, d).reshape(2, d, 2, d), np.eye(2))
    lb = np.einsum("cpsq,ab->acpbsq", ll_l_operator(p, mu, d).reshape(2, d, 2, d), np.eye(2))
    la = la.reshape(4 * d, 4 * d)
    lb = lb.reshape(4 * d, 4 * d)
    r = np.kron(ll_r_matrix(p, lam - mu), np.eye(d))
    dev = r @ la @ lb - lb @ la @ r
    keep = _retained(d, aux=4)
    return float(np.max(np.abs(dev[np.ix_(keep, keep)])))


# --- Bethe equations ---------------------------------------------------------


def _real_rapidities(lambdas: Sequence[complex], tol: float = REAL_TOL) -> list[float]:
    out = []
    for x in lambdas:
        z = complex(x)
        if abs(z.imag) > tol:
            raise PreconditionError(f"rapidity {z!r} is not real (open-boundary roots are real)")
        out.append(z.real)
    return out


def ll_bae_residual(p: LLParams, lambdas: Sequence[complex]) -> np.ndarray:
    """``log(e^{2i l_i L} / prod_j S_ij)`` reduced to imaginary part in (-pi, pi]."""
    lam = _real_rapidities(lambdas)
    check_distinct(lam, COINCIDENCE_TOL)
    ik = 1j * p.kappa
    out = np.empty(len(lam), dtype=np.complex128)
    for i, li in enumerate(lam):
        rhs = 1.0 + 0.0j
        for j, lj in enumerate(lam):
            if j != i:
                rhs *= (li + lj + ik) * (li - lj + ik) / ((li + lj - ik) * (li - lj - ik))
        z = cmath.log(cmath.exp(2j * li * p.length) / rhs)
        im = z.imag
        if im <= -math.pi:
            im += 2 * math.pi
        out[i] = complex(z.real, im)
    return out


@dataclass(frozen=True)
class LLRootSet:
    lambdas: tuple[float, ...]
    residual_norm: float
    converged: bool
    iterations: int


def solve_ll_bae(p: LLParams, initial_guess: Sequence[float], cfg: SolverConfig | None = None) -> LLRootSet:
    """Newton iteration on the (real) phase residuals, forward-difference Jacobian."""
    cfg = cfg or SolverConfig()
    x = np.array(_real_rapidities(initial_guess), dtype=float)
    if x.size == 0:
        return LLRootSet((), 0.0, True, 0)

    def f(v):
        try:
            return ll_bae_residual(p, v).imag
        except DegenerateRapidityError as exc:
            raise DomainEscapeError(f"iterate {list(v)} left the domain: {exc}", list(v)) from exc

    fx = f(x)
    res = float(np.max(np.abs(fx)))
    it = 0
    while res > cfg.tolerance and it < cfg.max_iterations:
        jac = np.empty((x.size, x.size))
        for j in range(x.size):
            xp = x.copy()
            xp[j] += cfg.fd_step
            jac[:, j] = (f(xp) - fx) / cfg.fd_step
        try:
            dx = solve_linear(jac, -fx).real
        except SingularMatrixError as exc:
            raise SolverError(f"singular Jacobian at iteration {it}: {exc}") from exc
        x = x + cfg.damping * dx
        fx = f(x)
        res = float(np.max(np.abs(fx)))
        it += 1
    return LLRootSet(tuple(float(v) for v in x), res, res <= cfg.tolerance, it)


def default_rapidities(p: LLParams, n: int) -> list[float]:
    """Free-particle standing-wave guesses k*pi/L, k = 1..n."""
    return [k * math.pi / p.length for k in range(1, n + 1)]


# --- MPS tensors -------------------------------------------------------------


@dataclass(frozen=True)
class LLCoefficients:
    """delta_m, gamma_{n,m}, beta_{n,m} for one rapidity (complex conjugates give the starred ones)."""

    ka: float
    lam: float
    kappa: float
    spacing: float

    def delta(self, m: int) -> complex:
        if m < 0:
            return 0j
        return 1j * math.sqrt((m + 1) * self.ka * (1 + m * self.ka / 4))

    def gamma(self, m: int) -> complex:
        return 1 - 1j * (self.lam + 1j * self.kappa / 2) * self.spacing / 2 + m * self.ka / 2

    def beta(self, m: int) -> complex:
        return 1 + 1j * (self.lam + 1j * self.kappa / 2) * self.spacing / 2 + m * self.ka / 2


def ll_coefficients(p: LLParams, lam: float) -> LLCoefficients:
    return LLCoefficients(p.ka, float(lam), p.kappa, p.spacing)


def recursion_blocks(co: LLCoefficients, m: int) -> dict[int, np.ndarray]:
    """The 4x4 matrices multiplying C_{n,m+s} in C_{n+1,m}, keyed by shift s."""
    dl, g, b = co.delta, co.gamma, co.beta
    gs = lambda k: np.conj(g(k))  # noqa: E731
    bs = lambda k: np.conj(b(k))  # noqa: E731
    k = {s: np.zeros((4, 4), dtype=np.complex128) for s in (-2, -1, 0, 1, 2)}
    k[2][2, 1] = -dl(m) * dl(m + 1)
    k[-2][1, 2] = -dl(m - 1) * dl(m - 2)
    k[1][0, 1] = -dl(m) * g(m)
    k[1][2, 0] = dl(m) * bs(m + 1)
    k[1][2, 3] = -dl(m) * b(m)
    k[1][3, 1] = dl(m) * gs(m + 1)
    k[-1][0, 2] = -dl(m - 1) * bs(m - 1)
    k[-1][1, 0] = dl(m - 1) * g(m)
    k[-1][1, 3] = -dl(m - 1) * gs(m - 1)
    k[-1][3, 2] = dl(m - 1) * b(m)
    k[0][0, 0] = g(m) * bs(m)
    k[0][0, 3] = dl(m - 1) ** 2
    k[0][1, 1] = g(m) * gs(m)
    k[0][2, 2] = b(m) * bs(m)
    k[0][3, 0] = dl(m) ** 2
    k[0][3, 3] = b(m) * gs(m)
    return k


@dataclass(frozen=True)
class LLSiteTensors:
    c_tensors: tuple[np.ndarray, ...]  # C_{n,m}, m = 0..2n
    rapidities: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.rapidities)

    @property
    def bond_dim(self) -> int:
        return self.c_tensors[0].shape[0]

    def c(self, m: int) -> np.ndarray:
        """C_{n,m}; identically zero outside 0..2n."""
        if 0 <= m < len(self.c_tensors):
            return self.c_tensors[m]
        return np.zeros((self.bond_dim, self.bond_dim), dtype=np.complex128)


def ll_site_tensors(p: LLParams, lambdas: Sequence[complex], max_n: int = MAX_TENSOR_N) -> LLSiteTensors:
    """C_{n,m} from C_{0,0} = [1] by the five-term recursion, one rapidity at a time."""
    lam = _real_rapidities(lambdas)
    if len(lam) > max_n:
        raise SizeLimitError(f"site tensors for n={len(lam)} exceed cap n<={max_n}")
    cs = [np.ones((1, 1), dtype=np.complex128)]
    for l in lam:
        co = ll_coefficients(p, l)
        dim = cs[0].shape[0]
        zero = np.zeros((dim, dim), dtype=np.complex128)
        get = lambda m: cs[m] if 0 <= m < len(cs) else zero  # noqa: E731
        new = []
        for m in range(len(cs) + 2):
            blocks = recursion_blocks(co, m)
            new.append(sum(kron(blocks[s], get(m + s)) for s in blocks))
        cs = new
    return LLSiteTensors(tuple(cs), tuple(lam))


def ll_single_site_direct(p: LLParams, lambdas: Sequence[complex], local_dim: int | None = None) -> list[np.ndarray]:
    """<m| A_nbar B^t_nunder ... A_1bar B^t_1under |0> straight from the L-operators.

    Independent of the recursion; used as an oracle for :func:`ll_site_tensors`.
    """
    lam = _real_rapidities(lambdas)
    d = local_dim or 2 * len(lam) + 1
    k2 = 1j * p.kappa / 2
    cs = [np.ones((1, 1), dtype=np.complex128)] + [np.zeros((1, 1), dtype=np.complex128)] * (d - 1)
    for l in lam:
        a = ll_l_operator(p, l + k2, d).reshape(2, d, 2, d)
        bt = sy_conjugate(ll_l_operator(p, -l + k2, d), d).reshape(2, d, 2, d)
        pair = [
            [sum(np.kron(a[:, m, :, k], bt[:, k, :, j]) for k in range(d)) for j in range(d)] for m in range(d)
        ]
        cs = [sum(kron(pair[m][j], cs[j]) for j in range(d)) for m in range(d)]
    return cs


@dataclass(frozen=True)
class OccupationConfiguration:
    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(m) for m in self.occupations)
        if any(m < 0 for m in occ):
            raise PreconditionError(f"occupations must be non-negative: {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def total(self) -> int:
        return sum(self.occupations)

    def label(self) -> str:
        return "m=" + ",".join(str(m) for m in self.occupations)

    def index(self, local_dim: int) -> int:
        idx = 0
        for m in self.occupations:
            if m >= local_dim:
                raise ContractViolation(f"occupation {m} exceeds local_dim {local_dim}")
            idx = idx * local_dim + m
        return idx


def occupation_configurations(sites: int, n: int) -> list[OccupationConfiguration]:
    """All occupation tuples with total n, in lexicographic order of the tuple."""
    return [
        OccupationConfiguration(occ)
        for occ in itertools.product(range(n + 1), repeat=sites)
        if sum(occ) == n
    ]


def ll_amplitude(t: LLSiteTensors, occ: OccupationConfiguration, boundary: np.ndarray | None = None) -> complex:
    """Tr[C_{n,m_1} ... C_{n,m_N} Q_n]; ``boundary`` overrides Q_n (e.g. identity)."""
    if occ.total != t.n:
        raise ContractViolation(f"configuration holds {occ.total} particles, tensors built for n={t.n}")
    if boundary is None:
        bd = build_boundary(t.n)
        row = bd.bra
        for m in occ.occupations:
            row = row @ t.c(m)
        return complex(row @ bd.ket)
    m_acc = np.eye(t.bond_dim, dtype=np.complex128)
    for m in occ.occupations:
        m_acc = m_acc @ t.c(m)
    return complex(np.trace(m_acc @ np.asarray(boundary)))


def ll_hardcore_amplitude(t: LLSiteTensors, positions: Sequence[int], sites: int) -> complex:
    """Hard-core trace with runs of C_{n,0} between single C_{n,1} insertions (1-based positions)."""
    pos = [int(x) for x in positions]
    if len(pos) != t.n or any(b <= a for a, b in zip(pos, pos[1:])) or (pos and (pos[0] < 1 or pos[-1] > sites)):
        raise ContractViolation(f"bad hard-core positions {pos} for n={t.n}, N={sites}")
    c0, c1 = t.c(0), t.c(1)
    mp = np.linalg.matrix_power
    m_acc = np.eye(t.bond_dim, dtype=np.complex128)
    prev = 0
    for x in pos:
        m_acc = m_acc @ mp(c0, x - prev - 1) @ c1
        prev = x
    m_acc = m_acc @ mp(c0, sites - prev)
    return complex(np.trace(m_acc @ build_boundary(t.n).q_n))


# --- oracle ------------------------------------------------------------------


def _apply_site(op: np.ndarray, state: np.ndarray, site: int, d: int) -> np.ndarray:
    """Apply an aux (x) site operator to a tensor of shape (2, d, ..., d)."""
    t = op.reshape(2, d, 2, d)
    out = np.tensordot(t, state, axes=([2, 3], [0, site + 1]))
    # out axes: a, p, then remaining state axes with the site axis removed
    return np.moveaxis(out, 1, site + 1)


def _check_fock(p: LLParams, local_dim: int) -> None:
    if local_dim**p.sites > MAX_FOCK_DIM or local_dim**p.sites * 2 > MAX_DIM:
        raise SizeLimitError(f"Fock lattice dimension {local_dim}^{p.sites} exceeds cap {MAX_FOCK_DIM}")


def ll_apply_b(p: LLParams, lam: float, vec: np.ndarray, local_dim: int) -> np.ndarray:
    """B(lam) applied to a lattice vector, without forming the monodromy.

    T = A_1 ... A_N B_N ... B_1 with A_i = L_i(lam + ik/2) and
    B_i = sy L_i^t(-lam + ik/2) sy; B(lam) = <up| T |down>.
    """
    d, N = local_dim, p.sites
    k2 = 1j * p.kappa / 2
    a_op = ll_l_operator(p, lam + k2, d)
    b_op = sy_conjugate(aux_transpose(ll_l_operator(p, -lam + k2, d), d), d)
    st = np.zeros((2,) + (d,) * N, dtype=np.complex128)
    st[1] = np.asarray(vec, dtype=np.complex128).reshape((d,) * N)
    for s in range(N):
        st = _apply_site(b_op, st, s, d)
    for s in reversed(range(N)):
        st = _apply_site(a_op, st, s, d)
    return st[0].reshape(-1)


def vacuum(p: LLParams, local_dim: int) -> np.ndarray:
    v = np.zeros(local_dim**p.sites, dtype=np.complex128)
    v[0] = 1.0
    return v


def ll_oracle_state(p: LLParams, lambdas: Sequence[complex], local_dim: int | None = None) -> np.ndarray:
    """B(l_n) ... B(l_1)|0> on the Fock lattice (index = base-d digits, site 1 most significant)."""
    lam = _real_rapidities(lambdas)
    d = local_dim or 2 * len(lam) + 1
    if d < 2 * len(lam) + 1:
        raise PreconditionError(f"local_dim={d} < 2n+1={2 * len(lam) + 1}: truncation would not be exact")
    _check_fock(p, d)
    v = vacuum(p, d)
    for l in lam:
        v = ll_apply_b(p, l, v, d)
    return v


def ll_b_commutation_residual(p: LLParams, lam: float, mu: float, local_dim: int = 5) -> float:
    """Relative deviation of B(lam)B(mu)|0> from B(mu)B(lam)|0>."""
    _check_fock(p, local_dim)
    v = vacuum(p, local_dim)
    x = ll_apply_b(p, lam, ll_apply_b(p, mu, v, local_dim), local_dim)
    y = ll_apply_b(p, mu, ll_apply_b(p, lam, v, local_dim), local_dim)
    scale = max(np.max(np.abs(x)), np.max(np.abs(y)))
    return float(np.max(np.abs(x - y)) / scale) if scale else 0.0


def restrict_to_sector(vec: np.ndarray, p: LLParams, n: int, local_dim: int) -> dict[str, complex]:
    """Amplitude table of a lattice vector over all total-n occupation configurations."""
    return {c.label(): complex(vec[c.index(local_dim)]) for c in occupation_configurations(p.sites, n)}


def mps_table(p: LLParams, t: LLSiteTensors) -> dict[str, complex]:
    return {c.label(): ll_amplitude(t, c) for c in occupation_configurations(p.sites, t.n)}


def check_ll_sizes(p: LLParams, n: int) -> None:
    if n > MAX_LL_N:
        raise SizeLimitError(f"Lieb-Liniger MPS capped at n<={MAX_LL_N}")
    _check_fock(p, 2 * n + 1)
