"""Closed-form limits of the ensemble: moments, shifted semicircle, Stieltjes
transforms, first-order corrections, and the limiting log-determinant Xi(v).

At ``v = 0`` every object is taken by continuity: a point mass at 0.
"""

from __future__ import annotations

import cmath
import math
from math import comb

import numpy as np

from .linalg import gauss_chebyshev2_nodes

CATALAN_MAX = 30


def catalan(p: int) -> int:
    if p < 0:
        raise ValueError("p must be nonnegative")
    if p > CATALAN_MAX:
        raise OverflowError(f"catalan({p}) exceeds the 64-bit range kept by this module")
    t = 1
    for q in range(p):
        t = t * 2 * (2 * q + 1) // (q + 2)
    return t


def catalan_convolution(p: int) -> int:
    """t_{p} from the quadratic recurrence, for cross-checking ``catalan``."""
    t = [1]
    for k in range(p):
        t.append(sum(t[k - j] * t[j] for j in range(k + 1)))
    return t[p]


# --- limit moments ---------------------------------------------------------

def limit_moment_closed(k: int, v: float) -> float:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1.0
    if v == 0:
        return 0.0
    v2 = v * v
    l, odd = divmod(k, 2)
    # v^{2k-2p} folds the v^{4l} (even) or v^{4l+2} (odd) prefactor with v^{-2p}
    return math.fsum(comb(k, 2 * p) * catalan(p) * v2 ** (k - p) for p in range(l + 1))


def limit_moment_recurrence(k_max: int, v: float) -> list[float]:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    v2 = v * v
    m = [1.0, v2]
    for k in range(1, k_max):
        conv = math.fsum(m[k - 1 - j] * m[j] for j in range(k))
        m.append(v2 * m[k] + v2 * conv)
    return m[: k_max + 1]


def motzkin(k: int) -> int:
    """Motzkin numbers by their integer recurrence (independent of the above)."""
    M = [1, 1]
    for i in range(2, k + 1):
        M.append(((2 * i + 1) * M[i - 1] + (3 * i - 3) * M[i - 2]) // (i + 2))
    return M[k]


# --- shifted semicircle law --------------------------------------------------

def semicircle_pdf(v: float, lam):
    lam = np.asarray(lam, dtype=float)
    if v == 0:
        raise ValueError("the density does not exist at v = 0 (point mass)")
    x = lam - v * v
    r2 = 4 * v * v - x * x
    out = np.where(r2 > 0, np.sqrt(np.clip(r2, 0, None)) / (2 * math.pi * v * v), 0.0)
    return out if out.ndim else float(out)


def semicircle_cdf(v: float, lam):
    lam = np.asarray(lam, dtype=float)
    if v == 0:
        out = (lam >= 0).astype(float)
        return out if out.ndim else float(out)
    R = 2 * abs(v)
    x = np.clip(lam - v * v, -R, R)
    out = 0.5 + x * np.sqrt(R * R - x * x) / (math.pi * R * R) + np.arcsin(x / R) / math.pi
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def semicircle_support(v: float) -> tuple[float, float]:
    return v * v - 2 * abs(v), v * v + 2 * abs(v)


def semicircle_moment(v: float, k: int, count: int | None = None) -> float:
    """k-th moment of the shifted law by Gauss–Chebyshev quadrature.

    With lambda = 2 v nu the semicircle becomes (2/pi) sqrt(1-nu^2) d nu, and
    the integrand (v^2 + 2 v nu)^k is a polynomial, so ``k//2 + 1`` nodes
    are already exact.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if count is None:
        count = k // 2 + 1
    nodes, weights = gauss_chebyshev2_nodes(count)
    vals = weights * (v * v + 2 * v * nodes) ** k
    return (2 / math.pi) * math.fsum(vals.tolist())


# --- Stieltjes transforms ------------------------------------------------------

def _decaying_root(a: complex, b: complex) -> complex:
    """Root of a f^2 + b f + 1 = 0 that behaves like -1/b as b -> infinity."""
    s = cmath.sqrt(b * b - 4 * a)
    # the root of smaller modulus: pick the sign making |b + s| largest
    if abs(b - s) > abs(b + s):
        s = -s
    return -2 / (b + s)


def _check_off_segment(xi: complex, center: float, half_width: float):
    if xi.imag == 0 and abs(xi.real - center) <= half_width:
        raise ValueError(f"xi={xi} lies on the support [{center - half_width}, {center + half_width}]")


def stieltjes_f(v: float, xi) -> complex:
    """Stieltjes transform of the centered semicircle of radius 2|v|."""
    xi = complex(xi)
    _check_off_segment(xi, 0.0, 2 * abs(v))
    return _decaying_root(v * v, xi)


def stieltjes_g(v: float, xi) -> complex:
    """Stieltjes transform of the shifted law, from v^2 g^2 + (xi - v^2) g + 1 = 0."""
    xi = complex(xi)
    v2 = v * v
    _check_off_segment(xi, v2, 2 * abs(v))
    return _decaying_root(v2, xi - v2)


# --- first-order corrections ---------------------------------------------------

def correction_R1(k: int, v: float, interpretation: str = "per-term-power") -> float:
    """Order-1/rho correction coefficient from the three-sum tree formula.

    The common factor ``v^(2k-2p) t_p`` is distributed into each of the
    three sums with that sum's own index. For k = 3 this gives
    3 v^6 + 4 v^4 whereas the exact expansion (``izeta.exact``) gives
    3 v^6 + 3 v^4; both are reported side by side.
    """
    if interpretation != "per-term-power":
        raise ValueError(f"unsupported interpretation {interpretation!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    v2 = v * v
    first = math.fsum(
        comb(k, 2 * p) * catalan(p) * (p * (p - 1) / (p + 2)) * v2 ** (k - p)
        for p in range(k // 2 + 1)
    )
    second = 4 * math.fsum(
        comb(k, 2 * p + 1) * catalan(p) * p * v2 ** (k - p)
        for p in range((k - 1) // 2 + 1)
    )
    third = math.fsum(
        comb(k, 2 * p + 2) * catalan(p) * ((4 * p + 2) / (p + 2)) * v2 ** (k - p)
        for p in range((k - 2) // 2 + 1)
    ) if k >= 2 else 0.0
    return first + second + third


# --- combinatorial identities ------------------------------------------------

def walk_count_identity(p: int) -> tuple[int, int]:
    """Tree walks with one edge traversed four times, counted two ways."""
    if p < 2:
        raise ValueError("p must be >= 2")
    lhs = math.factorial(2 * p) // (math.factorial(p - 2) * math.factorial(p + 2))
    num = catalan(p) * p * (p - 1)
    if num % (p + 2):
        raise ArithmeticError(f"t_p p (p-1) not divisible by p+2 at p={p}")
    return lhs, num // (p + 2)


def marked_tree_identity(p: int) -> tuple[int, int]:
    if p < 0:
        raise ValueError("p must be nonnegative")
    lhs = sum((2 * a + 1) * catalan(a) * catalan(p - a) for a in range(p + 1))
    return lhs, (p + 1) * catalan(p + 1)


# --- limiting log-determinant ---------------------------------------------------

XI_DEFAULT_NODES = 64
XI_MAX_NODES = 1024


def _xi_quadrature(v: complex, count: int) -> complex:
    nodes, weights = gauss_chebyshev2_nodes(count)
    arg = 1 + v * v + 2 * v * nodes
    if np.any((arg.real <= 0) & (arg.imag == 0)):
        raise ValueError(f"log argument hits the branch cut for v={v}")
    return complex((2 / math.pi) * np.sum(weights * np.log(arg.astype(np.complex128))))


def xi_limit(v, node_count: int | None = None) -> complex:
    """Integral of log(1 + lambda) against the shifted semicircle at v.

    A fixed ``node_count`` uses exactly that rule; ``None`` starts from 64
    nodes and doubles until successive values agree to 1e-12 (cap 1024).
    """
    v = complex(v)
    if abs(v) > 1 - 1e-6:
        raise ValueError(f"|v| must be <= 1 - 1e-6, got {abs(v)}")
    if node_count is not None:
        if node_count < 8:
            raise ValueError("node_count must be >= 8")
        return _xi_quadrature(v, node_count)
    count = XI_DEFAULT_NODES
    prev = _xi_quadrature(v, count)
    while count < XI_MAX_NODES:
        count *= 2
        cur = _xi_quadrature(v, count)
        if abs(cur - prev) < 1e-12:
            return cur
        prev = cur
    return prev


def rh_defect(v_grid, node_count: int | None = 128) -> list[tuple[float, float]]:
    """|v^2/2 - Xi(v)| on a grid of real v in (-1, 1)."""
    out = []
    for v in v_grid:
        v = float(v)
        out.append((v, abs(v * v / 2 - xi_limit(v, node_count))))
    return out
