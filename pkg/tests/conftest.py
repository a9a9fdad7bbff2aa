import itertools

import networkx as nx
import numpy as np
import pytest

from relnodes.synthesis import random_linear_gaussian_bn


def nx_dag(dag):
    g = nx.DiGraph()
    g.add_nodes_from(range(len(dag.domain)))
    g.add_edges_from(dag.edges)
    return g


def nx_d_separated(g, xs, ys, zs):
    fn = getattr(nx, "is_d_separator", None) or nx.d_separated
    return fn(g, set(xs), set(ys), set(zs))


def ug_separated(edges, n, x, y, z):
    """Plain graph separation: no path from x to y avoiding z."""
    g = nx.Graph()
    g.add_nodes_from(i for i in range(n) if i not in z)
    g.add_edges_from((a, b) for a, b in edges if a not in z and b not in z)
    return not nx.has_path(g, x, y)


def singleton_queries(n, max_z=None):
    for x, y in itertools.combinations(range(n), 2):
        rest = [v for v in range(n) if v not in (x, y)]
        top = len(rest) if max_z is None else min(max_z, len(rest))
        for k in range(top + 1):
            for z in itertools.combinations(rest, k):
                yield x, y, z


@pytest.fixture
def random_bns():
    def make(count, n=8, p=0.25, start=0):
        return [random_linear_gaussian_bn(n, p, seed) for seed in range(start, start + count)]
    return make


def diagonal_gaussian(names, variances=None):
    from relnodes.models import GaussianModel
    variances = variances or [1.0] * len(names)
    return GaussianModel(names, np.zeros(len(names)), np.diag(variances))


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
