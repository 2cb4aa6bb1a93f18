"""Open-boundary Bethe-ansatz equations, Newton solver and eigenenergy."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np

from .exceptions import (
    DegenerateRapidityError,
    DomainEscapeError,
    PreconditionError,
    SingularMatrixError,
    SolverError,
)
from .kernel import POLE_TOL, ModelKernel
from .linalg import solve_linear

COINCIDENCE_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 200
    tolerance: float = 1e-12
    fd_step: float = 1e-7
    damping: float = 1.0
    polish_digits: int = 50

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise PreconditionError("max_iterations must be positive")
        if not self.tolerance > 0:
            raise PreconditionError("tolerance must be positive")
        if not 0 < self.fd_step < 1e-3:
            raise PreconditionError("fd_step must lie in (0, 1e-3)")
        if not 0 < self.damping <= 1:
            raise PreconditionError("damping must lie in (0, 1]")
        if self.polish_digits != 0 and not 20 <= self.polish_digits <= 200:
            raise PreconditionError("polish_digits must be 0 (off) or in [20, 200]")


@dataclass(frozen=True)
class RapiditySet:
    lambdas: tuple[complex, ...]
    chain_length: int
    kernel: ModelKernel
    residual_norm: float
    converged: bool
    iterations: int = 0
    polish_iterations: int = 0
    history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.lambdas)


def _wrap(z: complex) -> complex:
    """Reduce the imaginary part of a logarithm to (-pi, pi]."""
    im = math.remainder(z.imag, 2 * math.pi)
    if im <= -math.pi:
        im += 2 * math.pi
    return complex(z.real, im)


def check_distinct(lambdas: Sequence[complex], tol: float = COINCIDENCE_TOL) -> None:
    for i in range(len(lambdas)):
        for j in range(i + 1, len(lambdas)):
            if abs(lambdas[i] - lambdas[j]) < tol:
                raise DegenerateRapidityError(
                    f"rapidities {i} and {j} coincide ({lambdas[i]!r}); Bethe roots must be non-repeating"
                )


def _nonzero(value: complex, what: str) -> complex:
    if abs(value) < POLE_TOL:
        raise DegenerateRapidityError(f"pole guard: |{what}| < {POLE_TOL}")
    return value


def bae_residual(k: ModelKernel, L: int, lambdas: Sequence[complex]) -> np.ndarray:
    """Log-form residuals of the open-boundary Bethe equations.

    ``F_i = log(LHS_i / RHS_i)`` on the principal branch, where LHS is the
    two-body scattering product and RHS the boundary/propagation factor
    ``ch^2(l - eta/2) sh^2L(l + eta/2) / (ch^2(l + eta/2) sh^2L(l - eta/2))``.
    A rapidity set solves the equations iff every ``F_i`` vanishes.
    """
    if L < 1:
        raise PreconditionError(f"chain length must be positive, got {L}")
    lam = [complex(x) for x in lambdas]
    check_distinct(lam)
    eta = k.eta
    out = np.empty(len(lam), dtype=np.complex128)
    for i, li in enumerate(lam):
        lhs = 1.0 + 0.0j
        for j, lj in enumerate(lam):
            if j == i:
                continue
            num = _nonzero(k.sh(li + lj + eta), "sh(li+lj+eta)") * _nonzero(k.sh(li - lj + eta), "sh(li-lj+eta)")
            den = _nonzero(k.sh(li + lj - eta), "sh(li+lj-eta)") * _nonzero(k.sh(li - lj - eta), "sh(li-lj-eta)")
            lhs *= num / den
        sp = _nonzero(k.sh(li + eta / 2), "sh(l+eta/2)")
        sm = _nonzero(k.sh(li - eta / 2), "sh(l-eta/2)")
        cm = _nonzero(k.ch(li - eta / 2), "ch(l-eta/2)")
        cp = _nonzero(k.ch(li + eta / 2), "ch(l+eta/2)")
        rhs = (cm / cp) ** 2 * (sp / sm) ** (2 * L)
        ratio = lhs / rhs
        if ratio == 0 or not cmath.isfinite(ratio):
            raise DegenerateRapidityError(f"Bethe equation {i} is degenerate at {li!r}")
        out[i] = _wrap(cmath.log(ratio))
    return out


def energy(k: ModelKernel, lambdas: Sequence[complex]) -> complex:
    """E = sum_i 2 sh(eta)^2 / (sh(l_i + eta/2) sh(l_i - eta/2)) - Delta."""
    e = -complex(k.delta)
    s2 = k.sh(k.eta) ** 2
    for li in lambdas:
        li = complex(li)
        e += 2 * s2 / (_nonzero(k.sh(li + k.eta / 2), "sh(l+eta/2)") * _nonzero(k.sh(li - k.eta / 2), "sh(l-eta/2)"))
    return e


def _pack(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _unpack(x: np.ndarray) -> list[complex]:
    n = len(x) // 2
    return [complex(x[i], x[n + i]) for i in range(n)]


def solve_bae(
    k: ModelKernel,
    L: int,
    initial_guess: Sequence[complex],
    cfg: SolverConfig | None = None,
) -> RapiditySet:
    """Damped Newton iteration on :func:`bae_residual`.

    The Jacobian is formed by forward differences over the ``2n`` real
    coordinates (real and imaginary parts of each rapidity). A converged
    result is then refined by :func:`polish_roots` unless
    ``cfg.polish_digits`` is 0; the refinement is kept only if it stays
    within 1e-3 of the double-precision root and still meets the tolerance.
    Returns a
    :class:`RapiditySet` with ``converged=False`` and the last iterate if the
    iteration budget runs out.

    Raises:
        SolverError: the finite-difference Jacobian is singular.
        DomainEscapeError: an iterate hits a pole guard.
    """
    cfg = cfg or SolverConfig()
    guess = [complex(g) for g in initial_guess]
    if not guess:
        return RapiditySet((), L, k, 0.0, True, 0)
    x = _pack(np.asarray(guess))
    f = _pack(bae_residual(k, L, guess))
    history = [float(np.max(np.abs(f)))]
    it = 0
    while history[-1] > cfg.tolerance and it < cfg.max_iterations:
        jac = np.empty((len(x), len(x)))
        for j in range(len(x)):
            xp = x.copy()
            xp[j] += cfg.fd_step
            try:
                jac[:, j] = (_pack(bae_residual(k, L, _unpack(xp))) - f) / cfg.fd_step
            except DegenerateRapidityError as exc:
                raise DomainEscapeError(f"finite-difference probe left the domain: {exc}", _unpack(xp)) from exc
        try:
            dx = solve_linear(jac, -f).real
        except SingularMatrixError as exc:
            raise SolverError(f"singular Jacobian at iteration {it}: {exc}") from exc
        x = x + cfg.damping * dx
        it += 1
        try:
            f = _pack(bae_residual(k, L, _unpack(x)))
        except DegenerateRapidityError as exc:
            raise DomainEscapeError(f"iterate {_unpack(x)} left the domain: {exc}", _unpack(x)) from exc
        history.append(float(np.max(np.abs(f))))
    lam = _unpack(x)
    res = history[-1]
    polish_steps = 0
    if cfg.polish_digits and res <= cfg.tolerance:
        refined, polish_steps = polish_roots(k, L, lam, cfg.polish_digits)
        if max(abs(a - b) for a, b in zip(refined, lam)) < 1e-3:
            try:
                new_res = float(np.max(np.abs(bae_residual(k, L, refined))))
            except DegenerateRapidityError:
                new_res = math.inf
            if new_res <= cfg.tolerance:
                lam, res = refined, new_res
    return RapiditySet(tuple(lam), L, k, res, res <= cfg.tolerance, it, polish_steps, tuple(history))


def _mp_residual(k: ModelKernel, L: int, lam: list) -> list:
    """Same log-form residual as :func:`bae_residual`, in mpmath arithmetic."""
    if k.is_rational:
        sh, ch = (lambda x: x), (lambda x: mpmath.mpf(1))
    else:
        sh, ch = mpmath.sinh, mpmath.cosh
    if not k.is_rational and k.eta.imag == 0 and k.delta > 1:
        # rebuild eta from Delta: the rounded double eta shifts multiple roots apart
        eta = mpmath.mpc(mpmath.acosh(mpmath.mpf(k.delta)))
    else:
        eta = mpmath.mpc(k.eta)
    out = []
    for i, li in enumerate(lam):
        lhs = mpmath.mpc(1)
        for j, lj in enumerate(lam):
            if j != i:
                lhs *= sh(li + lj + eta) * sh(li - lj + eta) / (sh(li + lj - eta) * sh(li - lj - eta))
        rhs = (ch(li - eta / 2) / ch(li + eta / 2)) ** 2 * (sh(li + eta / 2) / sh(li - eta / 2)) ** (2 * L)
        z = mpmath.log(lhs / rhs)
        im = z.imag - 2 * mpmath.pi * mpmath.nint(z.imag / (2 * mpmath.pi))
        out.append(mpmath.mpc(z.real, im))
    return out


def polish_roots(k: ModelKernel, L: int, lambdas: Sequence[complex], digits: int = 50, max_steps: int = 200) -> tuple[list[complex], int]:
    """Newton refinement in extended precision.

    Double-precision residuals can only locate a root of multiplicity m to
    about eps**(1/m); the i*pi/2 root of the n=1 equations is a triple zero,
    so it stalls near 1e-5. Refining at ``digits`` decimal digits removes
    that floor. Stops when the step no longer shrinks the residual.
    """
    n = len(lambdas)
    if n == 0:
        return [], 0
    with mpmath.workdps(digits):
        x = [mpmath.mpc(complex(z)) for z in lambdas]
        h = mpmath.mpf(10) ** (-(digits // 2))
        f = _mp_residual(k, L, x)
        fnorm = max(abs(v) for v in f)
        floor = mpmath.mpf(10) ** (-(digits - 5))
        steps = 0
        while steps < max_steps and fnorm > floor:
            jac = mpmath.matrix(n, n)
            for j in range(n):
                xp = list(x)
                xp[j] += h
                fp = _mp_residual(k, L, xp)
                for i in range(n):
                    jac[i, j] = (fp[i] - f[i]) / h
            try:
                dx = mpmath.lu_solve(jac, mpmath.matrix([-v for v in f]))
            except ZeroDivisionError:
                break
            xn = [x[i] + dx[i] for i in range(n)]
            try:
                fn = _mp_residual(k, L, xn)
            except ZeroDivisionError:
                break
            nn = max(abs(v) for v in fn)
            if not nn < fnorm:
                break
            x, f, fnorm = xn, fn, nn
            steps += 1
        return [complex(z) for z in x], steps


def reflection_fixed_points(k: ModelKernel, lambdas: Sequence[complex], tol: float = 1e-8) -> list[int]:
    """Indices of rapidities invariant under l -> -l (mod i*pi): l = 0 or i*pi/2.

    Such a rapidity solves the one-particle equations for every L, but the
    resulting state is an eigenvector only in degenerate cases (e.g. i*pi/2
    when L th^2(eta/2) = 1, which includes Delta=2, L=3). They are flagged
    for the caller, not filtered.
    """
    out = []
    for i, lam in enumerate(lambdas):
        lam = complex(lam)
        im = lam.imag if k.is_rational else math.remainder(lam.imag, math.pi / 2)
        if abs(lam.real) < tol and abs(im) < tol:
            out.append(i)
    return out


def canonical_rapidity(k: ModelKernel, lam: complex) -> complex:
    """Map a rapidity into the fundamental strip Im in (-pi/2, pi/2] (trigonometric only)."""
    lam = complex(lam)
    if k.is_rational:
        return lam
    im = lam.imag - math.pi * math.floor((lam.imag + math.pi / 2) / math.pi)
    if im <= -math.pi / 2 + 1e-12:
        im += math.pi
    return complex(lam.real, im)


def same_solution(a: RapiditySet | Sequence[complex], b: RapiditySet | Sequence[complex], k: ModelKernel, tol: float = 1e-8) -> bool:
    """Whether two root sets agree as unordered sets, modulo i*pi for the trigonometric kernel."""
    la = list(a.lambdas if isinstance(a, RapiditySet) else a)
    lb = list(b.lambdas if isinstance(b, RapiditySet) else b)
    if len(la) != len(lb):
        return False

    def dist(x: complex, y: complex) -> float:
        d = complex(x) - complex(y)
        if not k.is_rational:
            d = complex(d.real, math.remainder(d.imag, math.pi))
        return abs(d)

    for x in la:
        best = min(range(len(lb)), key=lambda j: dist(x, lb[j]), default=None)
        if best is None or dist(x, lb[best]) > tol:
            return False
        lb.pop(best)
    return True
