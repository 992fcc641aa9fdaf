import os

import numpy as np
import pytest

from anonwalks.graphs import Graph, GraphCollection


def make_cycle(n, label=0):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], label=label)


def make_complete(n, label=1):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph.from_edges(n, edges, label=label)


def make_path(n, label=None):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], label=label)


def cycles_vs_completes(n_per_class=20, sizes=(8, 9, 10, 11, 12)):
    graphs, labels = [], []
    for i in range(n_per_class):
        n = sizes[i % len(sizes)]
        graphs.append(make_cycle(n, 0))
        labels.append(0)
        graphs.append(make_complete(n, 1))
        labels.append(1)
    return GraphCollection(graphs, np.array(labels), name="cycles-vs-completes")


def random_simple_graph(rng, n, p=0.5):
    """Connected-ish undirected simple graph: random edges plus a spanning path."""
    edges = {(i, i + 1) for i in range(n - 1)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((i, j))
    return Graph.from_edges(n, sorted(edges))


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


def write_benchmark_fixture(root):
    """Two-graph dataset in benchmark format: triangle and a single edge."""
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, "TINY_A.txt"), "w") as f:
        # triangle on global nodes 1-3 (both directions), edge on 4-5
        for i, j in [(1, 2), (2, 1), (2, 3), (3, 2), (1, 3), (3, 1),
                     (4, 5), (5, 4)]:
            f.write(f"{i}, {j}\n")
    with open(os.path.join(root, "TINY_graph_indicator.txt"), "w") as f:
        f.write("1\n1\n1\n2\n2\n")
    with open(os.path.join(root, "TINY_graph_labels.txt"), "w") as f:
        f.write("0\n1\n")
    return root


@pytest.fixture
def benchmark_dataset(tmp_path):
    return write_benchmark_fixture(str(tmp_path / "TINY"))


def dataset_dir(name):
    """Locate a benchmark dataset for the desk-scale reproduction tests.

    Looks in $ANONWALKS_DATA/<name> and ./data/<name>. Returns None when the
    dataset is not available in this environment.
    """
    candidates = []
    env = os.environ.get("ANONWALKS_DATA")
    if env:
        candidates.append(os.path.join(env, name))
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates.append(os.path.join(here, "data", name))
    for c in candidates:
        if os.path.isdir(c):
            return c
    return None
