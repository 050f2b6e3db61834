"""Dense kernels: symmetric eigensolver, complex log-determinant, Gauss–Chebyshev rule."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg


class EigenNonConvergence(RuntimeError):
    def __init__(self, index: int, sweeps: int):
        super().__init__(f"eigenvalue {index} did not converge within {sweeps} implicit-shift sweeps")
        self.index = index
        self.sweeps = sweeps


class SingularMatrixError(ArithmeticError):
    """Zero pivot (to machine tolerance) met during LU factorization."""


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


class LogDet(NamedTuple):
    log_modulus: float
    argument: float

    def to_complex(self) -> complex:
        return complex(self.log_modulus, self.argument)


def symmetric(a) -> np.ndarray:
    """Symmetric matrix built from the upper triangle of ``a``."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def wrap_angle(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    return math.pi - ((math.pi - x) % (2 * math.pi))


# --- eigensolver --------------------------------------------------------------

def tridiagonalize(a: np.ndarray, want_q: bool = False):
    """Householder reduction A = Q T Q^T; returns (diag, offdiag, Q or None)."""
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    q = np.eye(n) if want_q else None
    for k in range(n - 2):
        x = a[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        alpha = -math.copysign(math.hypot(x[0], tail), x[0])
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = 2.0 * (p - (v @ p) * v)
        sub -= np.outer(v, w) + np.outer(w, v)
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
        if q is not None:
            blk = q[:, k + 1:]
            blk -= 2.0 * np.outer(blk @ v, v)
    return np.diag(a).copy(), np.diag(a, 1).copy(), q


def tql_implicit(d, e, z=None, max_sweeps: int | None = None):
    """Implicit-shift QL on a symmetric tridiagonal matrix (in place).

    ``e[i]`` couples ``d[i]`` and ``d[i+1]``. Rotations are accumulated into
    the columns of ``z`` when given. The sweep budget is shared across all
    eigenvalues.
    """
    n = len(d)
    d = np.asarray(d, dtype=np.float64)
    e = np.append(np.asarray(e, dtype=np.float64)[: n - 1], 0.0)
    if max_sweeps is None:
        max_sweeps = 40 * n
    eps = np.finfo(np.float64).eps
    dl = d.tolist()
    el = e.tolist()
    sweeps = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(dl[m]) + abs(dl[m + 1])
                if abs(el[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise EigenNonConvergence(l, max_sweeps)
            g = (dl[l + 1] - dl[l]) / (2.0 * el[l])
            r = math.hypot(g, 1.0)
            g = dl[m] - dl[l] + el[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            for i in range(m - 1, l - 1, -1):
                f = s * el[i]
                b = c * el[i]
                r = math.hypot(f, g)
                el[i + 1] = r
                if r == 0.0:
                    dl[i + 1] -= p
                    el[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = dl[i + 1] - p
                r = (dl[i] - g) * s + 2.0 * c * b
                p = s * r
                dl[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
            else:
                dl[l] -= p
                el[l] = g
                el[m] = 0.0
    return np.array(dl), z


def sym_eigen(H, want_vectors: bool = False, method: str = "lapack",
              max_sweeps: int | None = None) -> EigenDecomposition:
    """Eigenvalues (ascending) and optionally orthonormal eigenvectors.

    ``method="lapack"`` calls LAPACK's symmetric driver through SciPy;
    ``method="ql"`` runs the Householder + implicit QL path implemented above
    (O(n^3), pure NumPy, intended for moderate sizes and cross-checks).
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    if method == "lapack":
        try:
            if want_vectors:
                w, q = scipy.linalg.eigh(H, check_finite=False)
                return EigenDecomposition(w, q)
            return EigenDecomposition(scipy.linalg.eigh(H, eigvals_only=True, check_finite=False))
        except np.linalg.LinAlgError as exc:
            # LAPACK reports the count of unconverged off-diagonals, not an index
            raise EigenNonConvergence(-1, 0) from exc
    if method != "ql":
        raise ValueError(f"unknown eigensolver method {method!r}")
    d, e, q = tridiagonalize(H, want_q=want_vectors)
    w, z = tql_implicit(d, e, q, max_sweeps=max_sweeps)
    order = np.argsort(w, kind="stable")
    w = w[order]
    if want_vectors:
        return EigenDecomposition(w, z[:, order])
    return EigenDecomposition(w)


def eigvals(H) -> np.ndarray:
    return sym_eigen(H).eigenvalues


# --- determinants --------------------------------------------------------------

def complex_logdet(M) -> LogDet:
    """log|det M| and arg det M via LU with partial pivoting.

    Raises SingularMatrixError when a pivot vanishes relative to
    ``dim * eps * max|M|``.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    n = M.shape[0]
    scale = np.abs(M).max()
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.diag(lu)
    mod = np.abs(pivots)
    tol = n * np.finfo(np.float64).eps * scale
    bad = np.flatnonzero(mod <= tol)
    if bad.size:
        raise SingularMatrixError(f"zero pivot at position {int(bad[0])}")
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    arg = float(np.angle(pivots).sum()) + (math.pi if swaps % 2 else 0.0)
    return LogDet(float(np.log(mod).sum()), wrap_angle(arg))


# --- quadrature ----------------------------------------------------------------

def gauss_chebyshev2_nodes(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals against sqrt(1 - x^2) on [-1, 1].

    Exact for polynomials up to degree ``2*count - 1``. Nodes are returned
    in decreasing order (cos of increasing angles).
    """
    if count < 1:
        raise ValueError("count must be positive")
    theta = np.arange(1, count + 1) * np.pi / (count + 1)
    return np.cos(theta), (np.pi / (count + 1)) * np.sin(theta) ** 2
