"""Six-vertex model kernels: parametrization, Bethe weights, R and L.

The trigonometric (XXZ) kernel uses ``Delta = cosh(eta)``. The rational (XXX)
kernel is the small-``epsilon`` limit after rescaling ``lambda -> lambda*eps``
and ``eta -> i*eps``: ``sinh`` becomes the identity, ``cosh`` becomes 1 and
``eta`` is the imaginary unit. Everything downstream only touches the kernel
through :meth:`ModelKernel.sh` / :meth:`ModelKernel.ch`, so the two cases share
all formulas.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DegenerateRapidityError, UnsupportedParametrizationError

POLE_TOL = 1e-12


class KernelKind(str, Enum):
    TRIGONOMETRIC = "trigonometric"
    RATIONAL = "rational"


@dataclass(frozen=True)
class ModelKernel:
    kind: KernelKind
    delta: float
    eta: complex

    def sh(self, x: complex) -> complex:
        return cmath.sinh(x) if self.kind is KernelKind.TRIGONOMETRIC else complex(x)

    def ch(self, x: complex) -> complex:
        return cmath.cosh(x) if self.kind is KernelKind.TRIGONOMETRIC else 1.0 + 0.0j

    @property
    def is_rational(self) -> bool:
        return self.kind is KernelKind.RATIONAL

    def describe(self) -> str:
        if self.is_rational:
            return "XXX (rational), Delta=1"
        return f"XXZ (trigonometric), Delta={self.delta:g}, eta={self.eta:.6g}"


@dataclass(frozen=True)
class WeightPair:
    b: complex
    c: complex


def make_kernel(kind: KernelKind | str, delta: float | None = None, *, eta: complex | None = None) -> ModelKernel:
    """Build a kernel from an anisotropy or an explicit crossing parameter.

    For the trigonometric kernel either ``delta > 1`` (principal real ``eta``)
    or an explicit ``eta`` must be given. The rational kernel takes no
    parameter and has ``Delta = 1``, ``eta = i``.
    """
    kind = KernelKind(kind)
    if kind is KernelKind.RATIONAL:
        if delta is not None and delta != 1:
            raise UnsupportedParametrizationError(f"rational kernel requires Delta=1, got {delta}")
        return ModelKernel(kind, 1.0, 1j)
    if eta is not None:
        eta = complex(eta)
        d = cmath.cosh(eta)
        if abs(d.imag) > POLE_TOL * max(1.0, abs(d)):
            raise UnsupportedParametrizationError(f"cosh(eta) is not real for eta={eta}")
        if delta is not None and abs(delta - d.real) > POLE_TOL * max(1.0, abs(delta)):
            raise UnsupportedParametrizationError(f"Delta={delta} inconsistent with eta={eta}")
        if abs(cmath.sinh(eta)) < POLE_TOL:
            raise UnsupportedParametrizationError("eta must not be a zero of sinh")
        return ModelKernel(kind, d.real, eta)
    if delta is None:
        raise UnsupportedParametrizationError("trigonometric kernel needs Delta or eta")
    if not delta > 1.0:
        raise UnsupportedParametrizationError(
            f"Delta={delta} <= 1 has no real principal eta; pass eta explicitly"
        )
    return ModelKernel(kind, float(delta), complex(math.acosh(delta)))


def xxz(delta: float) -> ModelKernel:
    return make_kernel(KernelKind.TRIGONOMETRIC, delta)


def xxx() -> ModelKernel:
    return make_kernel(KernelKind.RATIONAL)


def _guard(value: complex, what: str) -> complex:
    if abs(value) < POLE_TOL:
        raise DegenerateRapidityError(f"pole guard: |{what}| < {POLE_TOL}")
    return value


def weights(k: ModelKernel, lam: complex) -> WeightPair:
    """Bethe weights ``b = sh(lam - eta/2)/sh(lam + eta/2)``, ``c = sh(eta)/sh(lam + eta/2)``."""
    lam = complex(lam)
    den = _guard(k.sh(lam + k.eta / 2), "sh(lambda + eta/2)")
    return WeightPair(k.sh(lam - k.eta / 2) / den, k.sh(k.eta) / den)


def r_matrix(k: ModelKernel, lam: complex) -> np.ndarray:
    """Six-vertex R-matrix on V_a (x) V_b, basis (up, down) per factor."""
    lam = complex(lam)
    den = _guard(k.sh(lam + k.eta), "sh(lambda + eta)")
    r = np.eye(4, dtype=np.complex128)
    r[1, 1] = r[2, 2] = k.sh(lam) / den
    r[1, 2] = r[2, 1] = k.sh(k.eta) / den
    return r


def l_operator(k: ModelKernel, lam: complex) -> np.ndarray:
    """L(lam) = R(lam - eta/2) on auxiliary (x) physical, auxiliary slow.

    Auxiliary 2x2 blocks: A = diag(1, b), B = c|dn><up|, C = c|up><dn|,
    D = diag(b, 1).
    """
    w = weights(k, lam)
    m = np.eye(4, dtype=np.complex128)
    m[1, 1] = m[2, 2] = w.b
    m[1, 2] = m[2, 1] = w.c
    return m


def swap_matrix() -> np.ndarray:
    p = np.zeros((4, 4), dtype=np.complex128)
    p[0, 0] = p[3, 3] = p[1, 2] = p[2, 1] = 1.0
    return p
