import numpy as np
import pytest

from llmetro import ChainParams, Graph, build_exact_chain


def random_graph_max_deg(n: int, dmax: int, seed: int, extra: float = 1.5) -> Graph:
    """Seeded random graph with every degree capped at dmax."""
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    order = rng.permutation(len(pairs))
    deg = [0] * n
    edges = []
    target = int(extra * n)
    for k in order:
        u, w = pairs[int(k)]
        if deg[u] < dmax and deg[w] < dmax:
            edges.append((u, w))
            deg[u] += 1
            deg[w] += 1
            if len(edges) >= target:
                break
    return Graph(n, edges)


TINY_GRAPHS = {
    "edge": Graph(2, [(0, 1)]),
    "path3": Graph(3, [(0, 1), (1, 2)]),
    "triangle": Graph(3, [(0, 1), (1, 2), (0, 2)]),
}


@pytest.fixture(scope="session")
def exact_chains():
    """Exact chains for every tiny instance used by the oracle tests."""
    cache = {}

    def get(name: str, q: int, p: float):
        key = (name, q, p)
        if key not in cache:
            cache[key] = build_exact_chain(TINY_GRAPHS[name], ChainParams(q=q, p=p, seed=0))
        return cache[key]

    return get
