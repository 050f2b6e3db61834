"""The ensemble H = (v^2/rho) B - (v/sqrt(rho)) A and its Monte Carlo harness."""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exact import exact_moment_oracle  # noqa: F401  (re-exported)
from .graph import EnsembleParams, GraphSample, sample_er_graph
from .linalg import EigenNonConvergence, eigvals

SINGULAR_SHIFT_TOL = 1e-13


class SingularLogDet(ArithmeticError):
    pass


class LogZetaUndefined(ArithmeticError):
    def __init__(self, negative_count: int):
        super().__init__(
            f"log Z undefined on real branch: {negative_count} non-positive shifted eigenvalue(s)"
        )
        self.negative_count = negative_count


class ReplicaFailure(RuntimeError):
    def __init__(self, replica_index: int, cause: Exception):
        super().__init__(f"replica {replica_index} failed: {cause}")
        self.replica_index = replica_index


@dataclass
class SpectralMeasure:
    """Uniform mass on sorted eigenvalues (pooled over replicas if averaged)."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        self.eigenvalues = np.sort(np.asarray(self.eigenvalues, dtype=float))

    def __len__(self):
        return len(self.eigenvalues)

    def cdf(self, lam):
        return np.searchsorted(self.eigenvalues, lam, side="right") / len(self.eigenvalues)

    def moment(self, k: int) -> float:
        return float(np.mean(self.eigenvalues ** k))

    def ks_distance(self, cdf: Callable, cdf_left: Callable | None = None) -> float:
        """sup |F_hat - F| over the jump points of F_hat.

        ``cdf_left`` gives F(x-) and is only needed when F itself jumps.
        """
        x = self.eigenvalues
        N = len(x)
        F = np.asarray(cdf(x), dtype=float)
        Fl = F if cdf_left is None else np.asarray(cdf_left(x), dtype=float)
        # right value at the last copy of x, left limit at the first copy
        right = np.searchsorted(x, x, side="right") / N
        left = np.searchsorted(x, x, side="left") / N
        return float(max(np.max(np.abs(right - F)), np.max(np.abs(left - Fl))))


@dataclass
class MomentEstimate:
    k_max: int
    values: np.ndarray
    stderr: np.ndarray
    replicas: int
    per_replica: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class XiRecord:
    xi: float
    negative_count: int
    one_rho: float


# --- matrices ------------------------------------------------------------------

def build_H(g: GraphSample, rho: float, v: float) -> np.ndarray:
    if rho <= 0:
        raise ValueError("rho must be positive")
    H = g.adjacency() * (-v / math.sqrt(rho))
    H[np.diag_indices(g.n)] = (v * v / rho) * g.degrees
    return H


def theta_term(g: GraphSample, u) -> complex:
    """((|E| - n)/n) log(1 - u^2), the Euler-characteristic part of -(1/n) log Z."""
    u = complex(u)
    if u * u == 1:
        raise ValueError("theta_term undefined at u^2 = 1")
    return (g.num_edges - g.n) / g.n * cmath.log(1 - u * u)


def esd(H) -> SpectralMeasure:
    return SpectralMeasure(eigvals(H))


def spectrum(g: GraphSample, rho: float, v: float) -> np.ndarray:
    return eigvals(build_H(g, rho, v))


def power_moments(eigenvalues: np.ndarray, k_max: int) -> np.ndarray:
    """(1/n) sum lambda^k for k = 0..k_max."""
    out = np.empty(k_max + 1)
    out[0] = 1.0
    p = np.ones_like(eigenvalues)
    for k in range(1, k_max + 1):
        p = p * eigenvalues
        out[k] = p.mean()
    return out


def triangle_count(g: GraphSample) -> int:
    if g.num_edges < 3:
        return 0
    from scipy import sparse

    i, j = g.edges[:, 0], g.edges[:, 1]
    U = sparse.csr_matrix((np.ones(len(i), dtype=np.int64), (i, j)), shape=(g.n, g.n))
    # each triangle a<b<c is counted once as a->b->c closed by a->c
    return int((U @ U).multiply(U).sum())


def trace_moments(g: GraphSample, rho: float, v: float, k_max: int) -> np.ndarray:
    """(1/n) Tr H^k for k <= 3 from degree power sums and the triangle count.

    With D = (v^2/rho) B and W = (v/sqrt(rho)) A (zero diagonal):
    Tr H = Tr D, Tr H^2 = Tr D^2 + Tr W^2, Tr H^3 = Tr D^3 + 3 Tr D W^2 - Tr W^3.
    """
    if not 1 <= k_max <= 3:
        raise ValueError("trace_moments supports 1 <= k_max <= 3")
    d = g.degrees.astype(float)
    a = v * v / rho
    w2 = v * v / rho
    n = g.n
    out = [1.0, a * d.sum() / n]
    if k_max >= 2:
        out.append((a * a * (d * d).sum() + w2 * d.sum()) / n)
    if k_max >= 3:
        tri = triangle_count(g) if v != 0 else 0
        w3 = (v / math.sqrt(rho)) ** 3 * 6 * tri
        out.append((a**3 * (d**3).sum() + 3 * a * w2 * (d * d).sum() - w3) / n)
    return np.array(out)


# --- replica harness ---------------------------------------------------------------

def map_replicas(fn: Callable[[int], object], replicas: int, threads: int = 1) -> list:
    """Run ``fn(r)`` for r in range(replicas); results are returned by index."""

    def guarded(r):
        try:
            return fn(r)
        except Exception as exc:  # noqa: BLE001
            raise ReplicaFailure(r, exc) from exc

    if threads <= 1:
        return [guarded(r) for r in range(replicas)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(guarded, range(replicas)))


class RunningStats:
    """Welford mean/variance over vectors, fed in a fixed order."""

    def __init__(self, size: int):
        self.count = 0
        self.mean = np.zeros(size)
        self.m2 = np.zeros(size)

    def push(self, x):
        x = np.asarray(x, dtype=float)
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def variance(self):
        if self.count < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.count - 1)

    @property
    def stderr(self):
        return np.sqrt(self.variance / max(self.count, 1))


def empirical_moments(params: EnsembleParams, k_max: int, threads: int = 1,
                      method: str = "eigen") -> MomentEstimate:
    """Replica-averaged (1/n) Tr H^k, k = 0..k_max, with standard errors.

    ``method="eigen"`` uses the spectrum; ``method="trace"`` uses the
    closed trace formulas (k_max <= 3) and never diagonalizes.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if params.replicas < 2:
        raise ValueError("at least 2 replicas are needed for a standard error")
    if method not in ("eigen", "trace"):
        raise ValueError(f"unknown method {method!r}")

    def one(r):
        g = sample_er_graph(params, r)
        if method == "trace":
            return trace_moments(g, params.rho, params.v, k_max)
        return power_moments(spectrum(g, params.rho, params.v), k_max)

    rows = map_replicas(one, params.replicas, threads)
    stats = RunningStats(k_max + 1)
    for row in rows:
        stats.push(row)
    values = stats.mean.copy()
    values[0] = 1.0
    return MomentEstimate(k_max, values, stats.stderr, params.replicas, np.array(rows))


def averaged_esd(params: EnsembleParams, threads: int = 1) -> SpectralMeasure:
    rows = map_replicas(
        lambda r: spectrum(sample_er_graph(params, r), params.rho, params.v),
        params.replicas, threads,
    )
    return SpectralMeasure(np.concatenate(rows))


# --- log-determinants ----------------------------------------------------------------

def xi_from_eigenvalues(eigenvalues: np.ndarray, rho: float, v: float) -> XiRecord:
    one_rho = 1 - v * v / rho
    shifted = one_rho + np.asarray(eigenvalues, dtype=float)
    mags = np.abs(shifted)
    if np.any(mags < SINGULAR_SHIFT_TOL):
        raise SingularLogDet(
            f"singular log-determinant: shifted eigenvalue within {SINGULAR_SHIFT_TOL} of 0"
        )
    return XiRecord(float(np.mean(np.log(mags))), int(np.count_nonzero(shifted <= 0)), one_rho)


def xi_finite(g: GraphSample, rho: float, v: float) -> XiRecord:
    """(1/n) sum log|1 - v^2/rho + lambda_i| and the count of non-positive shifts."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return xi_from_eigenvalues(spectrum(g, rho, v), rho, v)


def log_zeta_from_xi(g: GraphSample, rho: float, v: float, rec: XiRecord) -> float:
    if rec.negative_count:
        raise LogZetaUndefined(rec.negative_count)
    theta = theta_term(g, v / math.sqrt(rho)).real
    return -theta - rec.xi


def log_zeta_normalized(g: GraphSample, rho: float, v: float) -> float:
    """(1/n) log Z(v / sqrt(rho)) on the real branch."""
    if v * v / rho >= 1:
        raise ValueError("need v^2 / rho < 1")
    return log_zeta_from_xi(g, rho, v, xi_finite(g, rho, v))


@dataclass
class XiSweepRow:
    v: float
    xi_mean: float
    xi_stderr: float
    negative_counts: list
    log_zeta_mean: float | None
    log_zeta_stderr: float | None
    log_zeta_defined: int


def xi_sweep(params: EnsembleParams, v_grid: Sequence[float], threads: int = 1) -> list[XiSweepRow]:
    """Per-v replica statistics of Xi and (1/n) log Z; each replica's graph is
    shared by every v in the grid."""
    v_grid = [float(v) for v in v_grid]
    for v in v_grid:
        if v * v / params.rho >= 1:
            raise ValueError(f"v={v}: need v^2 / rho < 1")

    def one(r):
        g = sample_er_graph(params, r)
        out = []
        for v in v_grid:
            rec = xi_finite(g, params.rho, v)
            lz = log_zeta_from_xi(g, params.rho, v, rec) if rec.negative_count == 0 else None
            out.append((rec, lz))
        return out

    per_replica = map_replicas(one, params.replicas, threads)
    rows = []
    for i, v in enumerate(v_grid):
        recs = [rep[i][0] for rep in per_replica]
        lzs = [rep[i][1] for rep in per_replica if rep[i][1] is not None]
        xs = np.array([r.xi for r in recs])
        xi_se = float(xs.std(ddof=1) / math.sqrt(len(xs))) if len(xs) > 1 else 0.0
        if lzs:
            lz = np.array(lzs)
            lz_mean = float(lz.mean())
            lz_se = float(lz.std(ddof=1) / math.sqrt(len(lz))) if len(lz) > 1 else 0.0
        else:
            lz_mean = lz_se = None
        rows.append(XiSweepRow(v, float(xs.mean()), xi_se,
                               [r.negative_count for r in recs], lz_mean, lz_se, len(lzs)))
    return rows


__all__ = [
    "SpectralMeasure", "MomentEstimate", "XiRecord", "XiSweepRow",
    "SingularLogDet", "LogZetaUndefined", "ReplicaFailure", "EigenNonConvergence",
    "build_H", "theta_term", "esd", "spectrum", "power_moments", "trace_moments",
    "triangle_count", "map_replicas", "RunningStats", "empirical_moments",
    "averaged_esd", "xi_from_eigenvalues", "xi_finite", "log_zeta_from_xi",
    "log_zeta_normalized", "xi_sweep", "exact_moment_oracle",
]
