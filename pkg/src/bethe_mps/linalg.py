"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex128 arrays. The Kronecker convention is
fixed globally: the left factor is the slowest-varying index,

    kron(A, B)[i*dB + k, j*dB + l] == A[i, j] * B[k, l],

which is also what :func:`numpy.kron` does. Auxiliary spaces added later in a
recursion are always placed on the left.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .exceptions import (
    ConvergenceError,
    PreconditionError,
    SingularMatrixError,
    SizeLimitError,
)

MAX_DIM = 2**16
MAX_EIG_DIM = 4096
SYMMETRY_TOL = 1e-12
PIVOT_TOL = 1e-14


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise PreconditionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise PreconditionError(f"{name} has non-finite entries")
    return m


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def relative_residual(lhs, rhs) -> float:
    """Max-norm of ``lhs - rhs`` divided by the larger operand max-norm."""
    scale = max(max_abs(lhs), max_abs(rhs))
    if scale == 0.0:
        return 0.0
    return max_abs(np.asarray(lhs) - np.asarray(rhs)) / scale


def kron(a, b, max_dim: int | None = None) -> np.ndarray:
    """Kronecker product with the left factor slowest.

    Raises:
        SizeLimitError: if either result dimension exceeds ``max_dim``
            (default :data:`MAX_DIM`).
    """
    a = as_cmatrix(a, "a")
    b = as_cmatrix(b, "b")
    cap = MAX_DIM if max_dim is None else max_dim
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > cap or cols > cap:
        raise SizeLimitError(f"kron result {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def kron_all(mats: Iterable, max_dim: int | None = None) -> np.ndarray:
    """Left-to-right Kronecker product; an empty sequence gives ``[[1]]``."""
    return reduce(lambda x, y: kron(x, y, max_dim), mats, np.ones((1, 1), dtype=np.complex128))


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


@dataclass(frozen=True)
class TensorIndexLayout:
    """Factor dimensions of a tensor-product space, slowest factor first."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        if not self.factor_dims or any(int(d) < 1 for d in self.factor_dims):
            raise PreconditionError(f"invalid factor dims {self.factor_dims}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def check(self, m: np.ndarray) -> None:
        if m.shape != (self.dim, self.dim):
            raise PreconditionError(f"matrix shape {m.shape} does not match layout {self.factor_dims}")


def partial_transpose(m, layout: TensorIndexLayout | Sequence[int], factor: int) -> np.ndarray:
    """Transpose ``m`` on a single tensor factor, leaving the others alone."""
    if not isinstance(layout, TensorIndexLayout):
        layout = TensorIndexLayout(tuple(layout))
    m = as_cmatrix(m)
    layout.check(m)
    k = len(layout.factor_dims)
    if not 0 <= factor < k:
        raise PreconditionError(f"factor {factor} out of range for {k} factors")
    t = m.reshape(layout.factor_dims + layout.factor_dims)
    perm = list(range(2 * k))
    perm[factor], perm[k + factor] = perm[k + factor], perm[factor]
    return t.transpose(perm).reshape(layout.dim, layout.dim)


def partial_trace(m, layout: TensorIndexLayout | Sequence[int], factors: Sequence[int]) -> np.ndarray:
    """Trace out the listed tensor factors."""
    if not isinstance(layout, TensorIndexLayout):
        layout = TensorIndexLayout(tuple(layout))
    m = as_cmatrix(m)
    layout.check(m)
    dims = list(layout.factor_dims)
    t = m.reshape(tuple(dims) * 2)
    for f in sorted(factors, reverse=True):
        k = len(dims)
        t = np.trace(t, axis1=f, axis2=k + f)
        dims.pop(f)
    d = int(np.prod(dims)) if dims else 1
    return t.reshape(d, d)


def sym_eig_real(h, tol: float = SYMMETRY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a real symmetric matrix.

    Returns ascending eigenvalues and a real orthogonal matrix whose columns
    are the eigenvectors.

    Raises:
        PreconditionError: ``h`` is not real symmetric within ``tol``
            (scaled by ``max(1, max|h|)``).
        SizeLimitError: ``h`` is larger than :data:`MAX_EIG_DIM`.
        ConvergenceError: LAPACK failed to converge.
    """
    h = as_cmatrix(h, "h")
    n = h.shape[0]
    if h.shape[1] != n:
        raise PreconditionError(f"h must be square, got {h.shape}")
    if n > MAX_EIG_DIM:
        raise SizeLimitError(f"eigensolver cap {MAX_EIG_DIM} exceeded ({n})")
    scale = max(1.0, max_abs(h))
    if max_abs(h.imag) > tol * scale:
        raise PreconditionError("h is not real")
    hr = h.real
    if max_abs(hr - hr.T) > tol * scale:
        raise PreconditionError("h is not symmetric")
    try:
        evals, evecs = np.linalg.eigh(0.5 * (hr + hr.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    return evals, evecs


def solve_linear(a, rhs) -> np.ndarray:
    """Solve ``a @ x = rhs`` by LU with partial pivoting.

    Raises:
        SingularMatrixError: a pivot falls below ``1e-14 * ||a||``.
    """
    a = as_cmatrix(a, "a")
    rhs = np.asarray(rhs, dtype=np.complex128)
    n = a.shape[0]
    if a.shape != (n, n):
        raise PreconditionError(f"a must be square, got {a.shape}")
    if rhs.shape[0] != n:
        raise PreconditionError(f"rhs length {rhs.shape[0]} != {n}")
    norm = np.linalg.norm(a, ord=np.inf)
    if norm == 0.0:
        raise SingularMatrixError("zero matrix")
    with warnings.catch_warnings():
        # singularity is reported through the pivot test below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL * norm:
        raise SingularMatrixError("pivot below tolerance; matrix is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def embed(op, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on ``targets`` (in that order) to the full product space."""
    dims = tuple(int(d) for d in dims)
    targets = tuple(targets)
    if len(set(targets)) != len(targets) or any(not 0 <= t < len(dims) for t in targets):
        raise PreconditionError(f"bad target factors {targets} for dims {dims}")
    op = as_cmatrix(op, "op")
    tdim = int(np.prod([dims[t] for t in targets]))
    if op.shape != (tdim, tdim):
        raise PreconditionError(f"operator shape {op.shape} does not match target dim {tdim}")
    rest = [i for i in range(len(dims)) if i not in targets]
    rdim = int(np.prod([dims[i] for i in rest])) if rest else 1
    total = tdim * rdim
    if total > MAX_DIM:
        raise SizeLimitError(f"embedded operator dimension {total} exceeds cap {MAX_DIM}")
    order = list(targets) + rest
    k = len(dims)
    big = np.kron(op, np.eye(rdim)).reshape([dims[i] for i in order] * 2)
    inv = np.argsort(order)
    perm = list(inv) + [k + i for i in inv]
    return big.transpose(perm).reshape(total, total)
