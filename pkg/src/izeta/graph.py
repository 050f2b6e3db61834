"""Erdős–Rényi sampling and the graph container shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of one Monte Carlo experiment.

    ``rho`` is the mean degree and may be any real in (0, n); integer values
    are not required by any formula used here.
    """

    n: int
    rho: float
    v: float = 1.0
    master_seed: int = 0
    replicas: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if not 0 < self.rho < self.n:
            raise ValueError(f"rho must satisfy 0 < rho < n, got rho={self.rho}, n={self.n}")
        if self.replicas < 1:
            raise ValueError(f"replicas must be >= 1, got {self.replicas}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def p(self) -> float:
        return self.rho / self.n


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Simple undirected graph stored as a sorted edge array plus degrees.

    ``edges`` has shape (m, 2) with ``edges[k, 0] < edges[k, 1]``, rows in
    lexicographic order.
    """

    n: int
    edges: np.ndarray
    degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            e = np.sort(e, axis=1)
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise ValueError("duplicate edges are not allowed")
        e.setflags(write=False)
        deg = np.bincount(e.ravel(), minlength=self.n).astype(np.int64)
        deg.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "degrees", deg)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self, dtype=np.float64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        i, j = self.edges[:, 0], self.edges[:, 1]
        a[i, j] = 1
        a[j, i] = 1
        return a

    def adjacency_sparse(self, dtype=np.float64):
        from scipy import sparse

        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i), dtype=dtype)
        return sparse.csr_matrix(
            (data, (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n),
        )

    def is_connected(self) -> bool:
        return self.component_count() == 1

    def component_count(self) -> int:
        from scipy.sparse.csgraph import connected_components

        return int(connected_components(self.adjacency_sparse(), directed=False)[0])

    def is_forest(self) -> bool:
        return self.num_edges == self.n - self.component_count()

    def __eq__(self, other):
        if not isinstance(other, GraphSample):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"GraphSample(n={self.n}, m={self.num_edges})"


def replica_rng(master_seed: int, replica_index: int) -> np.random.Generator:
    """Independent stream for one replica; order of creation is irrelevant."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replica_index),))
    return np.random.Generator(np.random.PCG64(ss))


def _pair_from_linear(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row-major enumeration of pairs i < j
    rows = np.arange(n - 1)
    offsets = rows * (2 * n - rows - 1) // 2
    i = np.searchsorted(offsets, idx, side="right") - 1
    j = idx - offsets[i] + i + 1
    return i, j


def sample_er_graph(params: EnsembleParams, replica_index: int) -> GraphSample:
    """Draw G(n, rho/n) for one replica.

    One uniform per vertex pair, pairs taken in row-major order
    (0,1), (0,2), ..., (n-2,n-1); a pair is an edge iff its uniform is
    below rho/n.
    """
    if not 0 <= replica_index < params.replicas:
        raise ValueError(f"replica_index {replica_index} outside [0, {params.replicas})")
    n = params.n
    rng = replica_rng(params.master_seed, replica_index)
    m = n * (n - 1) // 2
    hits = np.flatnonzero(rng.random(m) < params.p)
    i, j = _pair_from_linear(hits, n)
    return GraphSample(n, np.column_stack([i, j]))


def degree_stats(g: GraphSample) -> tuple[float, int]:
    if g.n == 0:
        return 0.0, 0
    return 2.0 * g.num_edges / g.n, int(g.degrees.max(initial=0))


# --- named graphs -----------------------------------------------------------

def cycle_graph(n: int) -> GraphSample:
    return GraphSample(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> GraphSample:
    return GraphSample(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(n: int) -> GraphSample:
    return GraphSample(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> GraphSample:
    return GraphSample(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> GraphSample:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return GraphSample(10, outer + spokes + inner)


BUILTIN_GRAPHS = {
    "c3": lambda: cycle_graph(3),
    "c5": lambda: cycle_graph(5),
    "k4": lambda: complete_graph(4),
    "petersen": petersen_graph,
    "path2": lambda: path_graph(2),
}


def builtin_graph(name: str) -> GraphSample:
    try:
        return BUILTIN_GRAPHS[name.lower()]()
    except KeyError:
        raise ValueError(
            f"unknown built-in graph {name!r}; choose from {sorted(BUILTIN_GRAPHS)}"
        ) from None


# --- text format: "n m" header, then one "i j" line per edge with i < j ----

def format_graph(g: GraphSample) -> str:
    lines = [f"{g.n} {g.num_edges}"]
    lines += [f"{i} {j}" for i, j in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> GraphSample:
    tokens = text.split("\n")
    rows = [ln.split() for ln in tokens if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError("graph file must start with a line 'n m'")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        body = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError:
        raise ValueError("graph file contains non-integer tokens") from None
    if len(body) != m:
        raise ValueError(f"header declares {m} edges but {len(body)} were found")
    for i, j in body:
        if not 0 <= i < j < n:
            raise ValueError(f"edge line '{i} {j}' violates 0 <= i < j < n")
    return GraphSample(n, body)


def read_graph(path) -> GraphSample:
    return parse_graph(Path(path).read_text())


def write_graph(g: GraphSample, path) -> None:
    Path(path).write_text(format_graph(g))
