"""Exact Ihara zeta machinery for small graphs.

Directed edges are indexed so that undirected edge ``k = (i, j)`` with
``i < j`` yields ``2k: i -> j`` and ``2k + 1: j -> i``; the orientation
flip is ``e ^ 1``.

Cycle length is the number of edges, so a triangle contributes a factor
``(1 - u^3)^-1`` to the Euler product.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphSample, degree_stats
from .linalg import LogDet, SingularMatrixError, complex_logdet, wrap_angle

DENSE_EDGE_OPERATOR_CAP = 600


class ZetaDomainError(ValueError):
    pass


class ZetaPoleError(ArithmeticError):
    def __init__(self, u):
        super().__init__(f"zeta pole/zero at u={u}")
        self.u = u


@dataclass(frozen=True)
class DirectedEdgeIndex:
    tail: np.ndarray
    head: np.ndarray

    @classmethod
    def from_graph(cls, g: GraphSample) -> "DirectedEdgeIndex":
        i, j = g.edges[:, 0], g.edges[:, 1]
        tail = np.empty(2 * len(i), dtype=np.int64)
        head = np.empty_like(tail)
        tail[0::2], head[0::2] = i, j
        tail[1::2], head[1::2] = j, i
        return cls(tail, head)

    def __len__(self):
        return len(self.tail)

    @staticmethod
    def inv(e):
        return np.bitwise_xor(e, 1)


@dataclass(frozen=True)
class CycleCounts:
    """``N[m-1]``: closed non-backtracking tail-less walks of length m with a
    marked starting edge; ``P[m-1]``: primitive cycle classes of length m."""

    N: tuple
    P: tuple

    @property
    def max_length(self) -> int:
        return len(self.N)


def hashimoto_apply(g: GraphSample, x, index: DirectedEdgeIndex | None = None):
    """(T x)[f] = sum of x[e] over e entering tail(f), excluding f reversed.

    ``x`` may be a vector or a (2|E|, b) block of column vectors; integer
    and object dtypes are preserved.
    """
    idx = index or DirectedEdgeIndex.from_graph(g)
    x = np.asarray(x)
    if x.shape[0] != len(idx):
        raise ValueError(f"expected leading dimension {len(idx)}, got {x.shape[0]}")
    inflow = np.zeros((g.n,) + x.shape[1:], dtype=x.dtype)
    np.add.at(inflow, idx.head, x)
    rev = np.arange(len(idx)) ^ 1
    return inflow[idx.tail] - x[rev]


def hashimoto_matrix(g: GraphSample, dtype=np.float64) -> np.ndarray:
    dim = 2 * g.num_edges
    if dim > DENSE_EDGE_OPERATOR_CAP:
        raise ValueError(
            f"dense edge operator limited to dimension {DENSE_EDGE_OPERATOR_CAP}, got {dim}"
        )
    return hashimoto_apply(g, np.eye(dim, dtype=dtype))


def mobius(k: int) -> int:
    if k < 1:
        raise ValueError("mobius is defined for positive integers")
    result = 1
    p = 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            result = -result
        p += 1
    return -result if k > 1 else result


def divisors(k: int) -> list[int]:
    return [d for d in range(1, k + 1) if k % d == 0]


def primitive_counts(N) -> list[int]:
    """Möbius inversion of N[m] = sum_{d | m} d * P[d]."""
    P = []
    for m in range(1, len(N) + 1):
        total = sum(mobius(m // d) * int(N[d - 1]) for d in divisors(m))
        if total % m:
            raise ArithmeticError(f"walk counts are not a valid cycle census at m={m}")
        P.append(total // m)
    return P


def walk_counts_from_primitive(P) -> list[int]:
    return [sum(d * int(P[d - 1]) for d in divisors(m)) for m in range(1, len(P) + 1)]


def nb_walk_counts(g: GraphSample, M: int) -> CycleCounts:
    """N[m] = Tr T^m for m = 1..M in exact integer arithmetic."""
    if M < 1:
        raise ValueError("M must be >= 1")
    dim = 2 * g.num_edges
    if dim == 0:
        return CycleCounts((0,) * M, (0,) * M)
    q = max(degree_stats(g)[1] - 1, 1)
    # entries of T^m are bounded by q^m; fall back to Python ints past int64
    dtype = np.int64 if dim * q**M < 2**62 else object
    idx = DirectedEdgeIndex.from_graph(g)
    block = 256
    traces = [0] * M
    for start in range(0, dim, block):
        cols = np.arange(start, min(start + block, dim))
        X = np.zeros((dim, len(cols)), dtype=dtype)
        X[cols, np.arange(len(cols))] = 1
        for m in range(M):
            X = hashimoto_apply(g, X, idx)
            traces[m] += int(sum(X[cols, np.arange(len(cols))].tolist()))
    N = tuple(traces)
    return CycleCounts(N, tuple(primitive_counts(N)))


def _check_u(u):
    u = complex(u)
    if abs(u * u - 1) == 0:
        raise ZetaDomainError(f"u={u}: the determinant formula is undefined at u^2 = 1")
    return u


def ihara_matrix(g: GraphSample, u) -> np.ndarray:
    """I + u^2 (B - I) - u A as a dense complex matrix."""
    u = complex(u)
    A = g.adjacency(np.complex128)
    M = -u * A
    M[np.diag_indices(g.n)] += 1 + u * u * (g.degrees - 1)
    return M


def ihara_rhs_eval(g: GraphSample, u) -> LogDet:
    """log of Z(u)^{-1} = (1-u^2)^(|E|-n) det(I + u^2 (B-I) - u A)."""
    u = _check_u(u)
    if u == 0:
        return LogDet(0.0, 0.0)
    try:
        ld = complex_logdet(ihara_matrix(g, u))
    except SingularMatrixError:
        raise ZetaPoleError(u) from None
    chi = g.num_edges - g.n
    w = 1 - u * u
    return LogDet(
        chi * math.log(abs(w)) + ld.log_modulus,
        wrap_angle(chi * cmath.phase(w) + ld.argument),
    )


def series_tail_bound(g: GraphSample, u, M: int) -> float:
    """Upper bound on sum_{m > M} N[m] |u|^m / m using N[m] <= 2|E| q^m."""
    q = max(degree_stats(g)[1] - 1, 0)
    x = q * abs(complex(u))
    if x == 0:
        return 0.0
    if x >= 1:
        return math.inf
    return 2 * g.num_edges * x ** (M + 1) / ((M + 1) * (1 - x))


def log_zeta_series(counts: CycleCounts, u) -> complex:
    """log Z(u) truncated: sum_m N[m] u^m / m."""
    u = complex(u)
    return sum(n * u**m / m for m, n in enumerate(counts.N, start=1))


def zeta_log_series_check(g: GraphSample, u, M: int) -> float:
    """|sum_{m<=M} N[m] u^m/m + log Z^{-1}(u)|."""
    u = complex(u)
    if M < 4:
        raise ValueError("M must be >= 4")
    maxdeg = degree_stats(g)[1]
    if maxdeg and abs(u) > 1 / (2 * maxdeg) + 1e-15:
        raise ValueError(f"|u|={abs(u)} exceeds 1/(2*max_degree)={1 / (2 * maxdeg)}")
    counts = nb_walk_counts(g, M)
    lz = ihara_rhs_eval(g, u).to_complex()
    return abs(log_zeta_series(counts, u) + lz)


def bass_identity_check(g: GraphSample, samples) -> float:
    """Max relative gap between det(I - uT) and the vertex-side formula."""
    if not g.is_connected() or g.num_edges < g.n:
        raise ValueError("bass_identity_check needs a connected graph with |E| >= n")
    T = hashimoto_matrix(g, np.complex128)
    eye = np.eye(len(T))
    worst = 0.0
    for u in samples:
        u = _check_u(u)
        lhs = complex_logdet(eye - u * T)
        rhs = ihara_rhs_eval(g, u)
        ratio = cmath.exp(complex(lhs.log_modulus - rhs.log_modulus,
                                  lhs.argument - rhs.argument))
        worst = max(worst, abs(ratio - 1))
    return worst
