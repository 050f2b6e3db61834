import numpy as np
import pytest

from izeta.graph import EnsembleParams, GraphSample, sample_er_graph

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(label, passed, detail)."""

    def record(label, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}" + (f" :: {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def random_connected_graphs(count, seed=2024, n_range=(4, 12)):
    """Connected ER graphs with |E| >= n (cyclomatic number >= 1)."""
    rng = np.random.default_rng(seed)
    out = []
    attempt = 0
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        rho = float(rng.uniform(2.0, min(n - 0.5, 5.0)))
        g = sample_er_graph(EnsembleParams(n, rho, 1.0, int(seed), 10**6), attempt)
        attempt += 1
        if g.num_edges >= n and g.is_connected():
            out.append(g)
    return out


def random_tree(n, seed):
    rng = np.random.default_rng(seed)
    return GraphSample(n, [(int(rng.integers(0, i)), i) for i in range(1, n)])
