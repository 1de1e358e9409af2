import numpy as np
import pytest

from concur.graph import RoadGraph


@pytest.fixture
def triangle():
    graph = RoadGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    labels = np.array([1, 0, 1], dtype=np.int8)
    return graph, labels


@pytest.fixture
def path4():
    return RoadGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


def random_graph(rng, n, avg_degree=4.0, features=0):
    """Random multigraph-ish edge soup; from_edges dedups. May leave isolates."""
    m = int(n * avg_degree / 2)
    edges = rng.integers(0, n, size=(m, 2))
    x = rng.standard_normal((n, features)) if features else None
    return RoadGraph.from_edges(n, edges, node_features=x)


def random_labels(rng, n, positive_ratio=0.3):
    return (rng.random(n) < positive_ratio).astype(np.int8)
